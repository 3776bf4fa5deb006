//! Near-linear space approximate nearest neighbor for l1 and l2.
//!
//! Preprocessing samples a multiset `I` of coordinates with the global
//! max-ratio probabilities, rescales every center on `I` by the inverse
//! probability (inverse square root under l2), and stores an oblivious
//! sketch of the rescaled centers. A query reads `q` only on `I`, rescales
//! and sketches it the same way, and returns the center whose sketch is
//! closest.
//!
//! The failure budget `delta` is split evenly over the four events the
//! guarantee conditions on (Markov overestimate of the nearest neighbor,
//! separation of far centers, sketch distortion, and the size of `I`); the
//! caller supplies a single `delta`.

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::params::{ceil_count, Params};
use crate::points::PointSet;
use crate::probe::ProbeSource;
use crate::rng::Rng;
use crate::sampling::{global_probabilities, sample_multiset, SpaceAccounting, SpaceReport};
use crate::sketch::{build_projection, l2_diff, median_abs_diff, ProjectionKind, ProjectionMatrix};

/// Default `c_t` for the l1 structure.
pub const DEFAULT_CT_L1: f64 = 0.005;
/// Default `c_t` for the l2 structure.
pub const DEFAULT_CT_L2: f64 = 0.0025;
/// Default `c_m` for the l1 structure.
pub const DEFAULT_CM_L1: f64 = 0.04;
/// Default `c_m` for the l2 structure.
pub const DEFAULT_CM_L2: f64 = 0.02;

/// Parameter preset with the default constants for `metric`.
pub fn default_params(metric: Metric, epsilon: f64, delta: f64, seed: u64) -> Params {
    if metric.exponent() == 2.0 {
        Params::new(epsilon, delta, DEFAULT_CT_L2, DEFAULT_CM_L2, seed)
    } else {
        Params::new(epsilon, delta, DEFAULT_CT_L1, DEFAULT_CM_L1, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `(1+eps)`-approximate with probability `1 - delta`.
    HighProbability,
    /// Constant approximation in expectation for inputs in `[-bound, bound]^d`.
    ExpectedConstant { grid_bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Norm {
    L1,
    L2,
}

impl Norm {
    fn of(metric: Metric) -> Result<Self> {
        match metric.exponent() {
            1.0 => Ok(Norm::L1),
            2.0 => Ok(Norm::L2),
            _ => Err(Error::UnsupportedMetric(format!(
                "{metric}; the near-linear structure supports l1 and l2"
            ))),
        }
    }

    fn rescale(self, x: f64, p: f64) -> f64 {
        match self {
            Norm::L1 => x / p,
            Norm::L2 => x / p.sqrt(),
        }
    }

    fn magic(self) -> &'static [u8; 4] {
        match self {
            Norm::L1 => b"SDL1",
            Norm::L2 => b"SDL2",
        }
    }
}

/// Sampling rounds `T` and sketch rows `m` for a build.
pub fn derived_sizes(n: usize, d: usize, norm_exponent: f64, params: &Params, profile: Profile) -> Result<(usize, usize)> {
    let (eps, delta) = (params.epsilon, params.delta);
    let n = n as f64;
    let (t, m) = match profile {
        Profile::HighProbability => {
            let log = (n / delta).ln();
            let eps_pow = if norm_exponent == 2.0 { eps.powi(4) } else { eps.powi(3) };
            (
                ceil_count(params.c_t, log / (eps_pow * delta * delta))?,
                ceil_count(params.c_m, log / (eps * eps * delta * delta))?,
            )
        }
        Profile::ExpectedConstant { grid_bound } => {
            let log = n.ln() * (grid_bound * d as f64).max(std::f64::consts::E).ln();
            (
                ceil_count(params.c_t, log / eps.powi(3))?,
                ceil_count(params.c_m, log / (eps * eps))?,
            )
        }
    };
    Ok((t, m.max(1)))
}

#[derive(Debug, Clone)]
pub struct LinearAnnStructure {
    norm: Norm,
    n: usize,
    d: usize,
    profile: Profile,
    params: Params,
    rounds: usize,
    mass: f64,
    /// The multiset `I`, one entry per sampled (round, coordinate).
    indices: Vec<usize>,
    probs: Vec<f64>,
    matrix: Option<ProjectionMatrix>,
    /// `n x m` sketched rescaled centers, row-major.
    sketches: Vec<f64>,
    // Derived on build and load; not part of the stored words.
    distinct: Vec<usize>,
    slot: Vec<usize>,
    rescaled: Option<Vec<f64>>,
}

impl PartialEq for LinearAnnStructure {
    fn eq(&self, o: &Self) -> bool {
        self.norm == o.norm
            && self.n == o.n
            && self.d == o.d
            && self.profile == o.profile
            && self.params == o.params
            && self.rounds == o.rounds
            && self.mass.to_bits() == o.mass.to_bits()
            && self.indices == o.indices
            && self.probs == o.probs
            && self.matrix == o.matrix
            && self.sketches == o.sketches
    }
}

/// Per-query read costs of a built structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeCount {
    /// Distinct coordinates read by one query.
    pub distinct: usize,
    /// `|I|` counted with multiplicity.
    pub multiset: usize,
    /// `T * mass`, the expected value of `|I|`.
    pub expected: f64,
}

impl LinearAnnStructure {
    pub fn preprocess(points: &PointSet, params: &Params, profile: Profile, rng: &mut Rng) -> Result<Self> {
        Self::build(points, params, profile, rng, false)
    }

    /// Like [`Self::preprocess`] but keeps the rescaled centers for inspection.
    pub fn preprocess_debug(points: &PointSet, params: &Params, profile: Profile, rng: &mut Rng) -> Result<Self> {
        Self::build(points, params, profile, rng, true)
    }

    fn build(points: &PointSet, params: &Params, profile: Profile, rng: &mut Rng, keep: bool) -> Result<Self> {
        let norm = Norm::of(points.metric())?;
        params.validate_upto(0.25)?;
        if let Profile::ExpectedConstant { grid_bound } = profile {
            if !(grid_bound > 0.0 && grid_bound.is_finite()) {
                return Err(Error::InvalidParameter("expected profile needs a positive grid bound".into()));
            }
            debug_assert!(points.coords().iter().all(|x| x.abs() <= grid_bound));
        }
        let (n, d) = (points.n(), points.d());
        let empty = |rounds| LinearAnnStructure {
            norm,
            n,
            d,
            profile,
            params: *params,
            rounds,
            mass: 0.0,
            indices: vec![],
            probs: vec![],
            matrix: None,
            sketches: vec![],
            distinct: vec![],
            slot: vec![],
            rescaled: keep.then(Vec::new),
        };
        if n == 1 {
            return Ok(empty(0));
        }
        let pv = match global_probabilities(points) {
            Ok(pv) => pv,
            // Every center coincides; any answer is exact.
            Err(Error::DegeneratePointSet) => return Ok(empty(0)),
            Err(e) => return Err(e),
        };
        let (rounds, m) = derived_sizes(n, d, points.metric().exponent(), params, profile)?;
        let sample = sample_multiset(&pv, rounds, rng);
        let indices: Vec<usize> = sample.iter().map(|s| s.coord).collect();
        let probs: Vec<f64> = sample.iter().map(|s| s.prob).collect();
        let kind = match norm {
            Norm::L1 => ProjectionKind::Cauchy,
            Norm::L2 => ProjectionKind::SignJl,
        };
        let matrix = build_projection(kind, m, indices.len(), rng)?;

        let mut rescaled = Vec::with_capacity(n * indices.len());
        let mut sketches = Vec::with_capacity(n * m);
        for c in points.iter() {
            let r: Vec<f64> = indices
                .iter()
                .zip(&probs)
                .map(|(&b, &p)| norm.rescale(c[b], p))
                .collect();
            sketches.extend(matrix.apply(&r));
            if keep {
                rescaled.extend(r);
            }
        }
        let (distinct, slot) = distinct_slots(&indices);
        Ok(LinearAnnStructure {
            norm,
            n,
            d,
            profile,
            params: *params,
            rounds,
            mass: pv.mass(),
            indices,
            probs,
            matrix: Some(matrix),
            sketches,
            distinct,
            slot,
            rescaled: keep.then_some(rescaled),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> Metric {
        match self.norm {
            Norm::L1 => Metric::L1,
            Norm::L2 => Metric::L2,
        }
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn sketch_rows(&self) -> usize {
        self.matrix.as_ref().map_or(0, |m| m.rows())
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// The sampled multiset `I`.
    pub fn sampled(&self) -> &[usize] {
        &self.indices
    }

    pub fn sampled_probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Distinct coordinates of `I`, ascending.
    pub fn distinct_coords(&self) -> &[usize] {
        &self.distinct
    }

    pub fn sketch_of(&self, i: usize) -> &[f64] {
        let m = self.sketch_rows();
        &self.sketches[i * m..(i + 1) * m]
    }

    /// Rescaled center `i` on `I`; only kept by [`Self::preprocess_debug`].
    pub fn rescaled_center(&self, i: usize) -> Option<&[f64]> {
        let k = self.indices.len();
        self.rescaled.as_ref().map(|r| &r[i * k..(i + 1) * k])
    }

    pub fn probe_count(&self) -> ProbeCount {
        ProbeCount {
            distinct: self.distinct.len(),
            multiset: self.indices.len(),
            expected: self.rounds as f64 * self.mass,
        }
    }

    /// Reads every distinct coordinate of `I` once and returns the rescaled
    /// query `u` on `I`.
    pub fn rescaled_query<P: ProbeSource>(&self, q: &mut P) -> Result<Vec<f64>> {
        if q.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: q.dim(),
            });
        }
        let bound = match self.profile {
            Profile::ExpectedConstant { grid_bound } => grid_bound,
            Profile::HighProbability => f64::INFINITY,
        };
        let values: Vec<f64> = self
            .distinct
            .iter()
            .map(|&b| {
                let v = q.read(b);
                debug_assert!(v.abs() <= bound, "query coordinate {b} = {v} outside the grid");
                v
            })
            .collect();
        Ok(self
            .slot
            .iter()
            .zip(&self.probs)
            .map(|(&s, &p)| self.norm.rescale(values[s], p))
            .collect())
    }

    /// Index of the approximate nearest center, with the sketch-space
    /// estimate for every center. Ties go to the lowest index.
    pub fn query_with_estimates<P: ProbeSource>(&self, q: &mut P) -> Result<(usize, Vec<f64>)> {
        let u = self.rescaled_query(q)?;
        let Some(matrix) = &self.matrix else {
            return Ok((0, vec![0.0; self.n]));
        };
        let mu = matrix.apply(&u);
        let estimates: Vec<f64> = (0..self.n)
            .map(|i| match self.norm {
                Norm::L1 => median_abs_diff(self.sketch_of(i), &mu),
                Norm::L2 => l2_diff(self.sketch_of(i), &mu),
            })
            .collect();
        let mut best = 0;
        for (i, &e) in estimates.iter().enumerate() {
            if e < estimates[best] {
                best = i;
            }
        }
        Ok((best, estimates))
    }

    pub fn query<P: ProbeSource>(&self, q: &mut P) -> Result<usize> {
        self.query_with_estimates(q).map(|(i, _)| i)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(self.norm.magic());
        w.u32(1);
        w.usize(self.n);
        w.usize(self.d);
        match self.profile {
            Profile::HighProbability => {
                w.u8(0);
                w.f64(0.0);
            }
            Profile::ExpectedConstant { grid_bound } => {
                w.u8(1);
                w.f64(grid_bound);
            }
        }
        write_params(&mut w, &self.params);
        w.usize(self.rounds);
        w.f64(self.mass);
        w.usizes(&self.indices);
        w.f64s(&self.probs);
        match &self.matrix {
            None => w.u8(0),
            Some(m) => {
                w.u8(m.kind().tag());
                w.usize(m.rows());
                w.usize(m.cols());
                w.f64s(m.entries());
            }
        }
        w.f64s(&self.sketches);
        w.buf
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let norm = match buf.get(..4) {
            Some(b"SDL1") => Norm::L1,
            Some(b"SDL2") => Norm::L2,
            _ => return Err(Error::Format("bad magic, expected SDL1 or SDL2".into())),
        };
        let mut r = Reader::new(buf, norm.magic())?;
        if r.u32()? != 1 {
            return Err(Error::Format("unsupported version".into()));
        }
        let n = r.usize()?;
        let d = r.usize()?;
        let profile = match (r.u8()?, r.f64()?) {
            (0, _) => Profile::HighProbability,
            (1, b) => Profile::ExpectedConstant { grid_bound: b },
            (t, _) => return Err(Error::Format(format!("unknown profile tag {t}"))),
        };
        let params = read_params(&mut r)?;
        let rounds = r.usize()?;
        let mass = r.f64()?;
        let indices = r.usizes()?;
        let probs = r.f64s()?;
        let matrix = match r.u8()? {
            0 => None,
            t => {
                let kind = ProjectionKind::from_tag(t)?;
                let rows = r.usize()?;
                let cols = r.usize()?;
                Some(ProjectionMatrix::from_entries(kind, rows, cols, r.f64s()?)?)
            }
        };
        let sketches = r.f64s()?;
        r.finish()?;
        let m = matrix.as_ref().map_or(0, |m| m.rows());
        if probs.len() != indices.len()
            || indices.iter().any(|&b| b >= d)
            || sketches.len() != n * m
            || matrix.as_ref().is_some_and(|mat| mat.cols() != indices.len())
        {
            return Err(Error::Format("inconsistent structure sizes".into()));
        }
        let (distinct, slot) = distinct_slots(&indices);
        Ok(LinearAnnStructure {
            norm,
            n,
            d,
            profile,
            params,
            rounds,
            mass,
            indices,
            probs,
            matrix,
            sketches,
            distinct,
            slot,
            rescaled: None,
        })
    }
}

impl SpaceAccounting for LinearAnnStructure {
    fn space_report(&self) -> SpaceReport {
        SpaceReport::linear(self.indices.len(), self.sketch_rows(), self.n)
    }
}

/// Ascending distinct coordinates and, per multiset entry, its position in
/// that list.
fn distinct_slots(indices: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut distinct = indices.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let slot = indices
        .iter()
        .map(|b| distinct.binary_search(b).expect("present"))
        .collect();
    (distinct, slot)
}

pub(crate) fn write_params(w: &mut Writer, p: &Params) {
    w.f64(p.epsilon);
    w.f64(p.delta);
    w.f64(p.c_t);
    w.f64(p.c_m);
    w.u64(p.seed);
}

pub(crate) fn read_params(r: &mut Reader<'_>) -> Result<Params> {
    Ok(Params {
        epsilon: r.f64()?,
        delta: r.f64()?,
        c_t: r.f64()?,
        c_m: r.f64()?,
        seed: r.u64()?,
    })
}
