//! Approximate nearest neighbor search with sublinear query probes for
//! the regime where the dimension dwarfs the number of centers.

pub mod ann_linear;
pub mod ann_quadratic;
mod codec;
pub mod comparator;
pub mod error;
pub mod generate;
pub mod metric;
pub mod oracle;
pub mod params;
pub mod points;
pub mod probe;
pub mod range_search;
pub mod rng;
pub mod sampling;
pub mod sketch;
pub mod tournament;

pub use ann_linear::{LinearAnnStructure, Profile};
pub use ann_quadratic::{QuadraticAnnStructure, Strategy};
pub use comparator::{Decision, PairComparator, Rule};
pub use error::{Error, Result};
pub use metric::{distance, Metric};
pub use params::Params;
pub use points::PointSet;
pub use probe::{ProbeSource, VecProbe};
pub use range_search::RangeStructure;
pub use rng::Rng;
pub use sampling::{global_probabilities, ProbabilityVector, SpaceAccounting, SpaceReport};
