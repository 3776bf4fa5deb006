//! Experiment runner behind the `sdnn-bench` binary. Each subcommand maps
//! to one experiment that returns a versioned [`Report`].

pub mod config;
pub mod experiments;
pub mod report;

use std::fmt;

use clap::{Parser, Subcommand};

pub use config::{Flags, Settings};
pub use report::{Check, Report, Row};

/// A bad flag combination; reported with exit code 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "sdnn-bench", version, about = "Sublinear-probe nearest neighbor experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a dataset and write it to --out.
    Gen(Flags),
    /// Near-linear l1 structure on planted instances.
    AnnL1(Flags),
    /// Near-linear l2 structure on planted instances.
    AnnL2(Flags),
    /// Quadratic-space l_p structure, scan and tournament.
    AnnLp(Flags),
    /// Approximate orthogonal range search.
    Range(Flags),
    /// Sampling mass bound and collapse recurrence.
    MassBound(Flags),
    /// Cauchy and sign-JL sketch accuracy.
    SketchQuality(Flags),
    /// Truncation and two-point comparator accuracy.
    Comparator(Flags),
    /// Comparison counts of scan and tournament.
    Tournament(Flags),
    /// Stored words as n and d grow.
    SpaceScaling(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Gen(f)
            | Command::AnnL1(f)
            | Command::AnnL2(f)
            | Command::AnnLp(f)
            | Command::Range(f)
            | Command::MassBound(f)
            | Command::SketchQuality(f)
            | Command::Comparator(f)
            | Command::Tournament(f)
            | Command::SpaceScaling(f) => f,
        }
    }

    /// Runs an experiment subcommand. `gen` produces no report.
    pub fn run(&self) -> anyhow::Result<Option<Report>> {
        use config::MetricArg;
        Ok(Some(match self {
            Command::Gen(f) => {
                experiments::gen(f)?;
                return Ok(None);
            }
            Command::AnnL1(f) => experiments::ann_linear(f, MetricArg::L1)?,
            Command::AnnL2(f) => experiments::ann_linear(f, MetricArg::L2)?,
            Command::AnnLp(f) => experiments::ann_lp(f)?,
            Command::Range(f) => experiments::range(f)?,
            Command::MassBound(f) => experiments::mass_bound(f)?,
            Command::SketchQuality(f) => experiments::sketch_quality(f)?,
            Command::Comparator(f) => experiments::comparator(f)?,
            Command::Tournament(f) => experiments::tournament(f)?,
            Command::SpaceScaling(f) => experiments::space_scaling(f)?,
        }))
    }
}
