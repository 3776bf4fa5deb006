//! Brute-force ground truth used to verify the approximate structures.
//! Oracles read full query vectors and are not probe-metered.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng::Rng;

/// Exact nearest neighbor; ties go to the lowest index.
pub fn exact_nn(points: &PointSet, q: &[f64]) -> Result<(usize, f64)> {
    if points.n() == 0 {
        return Err(Error::Empty);
    }
    points.check_query(q)?;
    let metric = points.metric();
    let mut best = (0, f64::INFINITY);
    for (i, c) in points.iter().enumerate() {
        let d = metric.eval(c, q);
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}

/// All indices whose center lies in the axis-aligned box spanned by `q1`, `q2`.
pub fn exact_range(points: &PointSet, q1: &[f64], q2: &[f64]) -> Result<Vec<usize>> {
    points.check_query(q1)?;
    points.check_query(q2)?;
    Ok(points
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            c.iter()
                .zip(q1.iter().zip(q2))
                .all(|(&x, (&a, &b))| a.min(b) <= x && x <= a.max(b))
        })
        .map(|(i, _)| i)
        .collect())
}

/// l1 distance from `c` to the box spanned by `q1`, `q2`.
pub fn box_distance(c: &[f64], q1: &[f64], q2: &[f64]) -> f64 {
    c.iter()
        .zip(q1.iter().zip(q2))
        .map(|(&x, (&a, &b))| (a.min(b) - x).max(x - a.max(b)).max(0.0))
        .sum()
}

/// l1 diameter of the box spanned by `q1`, `q2`.
pub fn box_diameter(q1: &[f64], q2: &[f64]) -> f64 {
    q1.iter().zip(q2).map(|(a, b)| (a - b).abs()).sum()
}

/// `dist(q, c_returned) / dist(q, c_nn)`, defined as 1 when both are zero.
pub fn approximation_ratio(points: &PointSet, q: &[f64], returned: usize) -> Result<f64> {
    let (_, best) = exact_nn(points, q)?;
    if returned >= points.n() {
        return Err(crate::error::invalid(format!("index {returned} out of range")));
    }
    let got = points.metric().eval(points.point(returned), q);
    Ok(if best == 0.0 {
        if got == 0.0 { 1.0 } else { f64::INFINITY }
    } else {
        got / best
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub seed: u64,
    pub returned: usize,
    pub nn: usize,
    pub ratio: f64,
    pub probes: u64,
    pub distinct_probes: u64,
    pub words: u64,
    pub success: bool,
}

impl TrialReport {
    /// Scores `returned` against the oracle; success means ratio <= 1 + eps.
    #[allow(clippy::too_many_arguments)]
    pub fn score(
        seed: u64,
        points: &PointSet,
        q: &[f64],
        returned: usize,
        epsilon: f64,
        probes: u64,
        distinct_probes: u64,
        words: u64,
    ) -> Result<Self> {
        let (nn, _) = exact_nn(points, q)?;
        let ratio = approximation_ratio(points, q, returned)?;
        Ok(TrialReport {
            seed,
            returned,
            nn,
            ratio,
            probes,
            distinct_probes,
            words,
            success: ratio <= 1.0 + epsilon,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trials: Vec<TrialReport>,
    pub success_rate: f64,
    pub mean_ratio: f64,
    pub max_ratio: f64,
    pub mean_probes: f64,
    pub mean_distinct_probes: f64,
    pub max_distinct_probes: u64,
    pub mean_words: f64,
    pub max_words: u64,
}

impl TrialSummary {
    pub fn from_reports(trials: Vec<TrialReport>) -> Self {
        let k = trials.len().max(1) as f64;
        let mean = |f: &dyn Fn(&TrialReport) -> f64| trials.iter().map(f).sum::<f64>() / k;
        TrialSummary {
            success_rate: mean(&|t| t.success as u8 as f64),
            mean_ratio: mean(&|t| t.ratio),
            max_ratio: trials.iter().map(|t| t.ratio).fold(f64::NEG_INFINITY, f64::max),
            mean_probes: mean(&|t| t.probes as f64),
            mean_distinct_probes: mean(&|t| t.distinct_probes as f64),
            max_distinct_probes: trials.iter().map(|t| t.distinct_probes).max().unwrap_or(0),
            mean_words: mean(&|t| t.words as f64),
            max_words: trials.iter().map(|t| t.words).max().unwrap_or(0),
            trials,
        }
    }
}

/// Runs `trials` independent trials in parallel. Trial `k` receives the seed
/// `Rng::derive(seed, k).next_u64()`, so results do not depend on scheduling.
pub fn run_trials<F>(trials: usize, seed: u64, trial: F) -> Result<TrialSummary>
where
    F: Fn(u64) -> Result<TrialReport> + Sync,
{
    if trials == 0 {
        return Err(crate::error::invalid("at least one trial is required"));
    }
    let reports = (0..trials as u64)
        .into_par_iter()
        .map(|k| trial(Rng::derive(seed, k).next_u64()))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialSummary::from_reports(reports))
}
