//! Global max-ratio coordinate probabilities and the multiset sampler built
//! on them.
//!
//! For every coordinate `b`, `p(b)` is the largest share of any pairwise
//! distance that `b` accounts for: `|c_i(b) - c_j(b)| / ||c_i - c_j||_1`
//! under l1, the squared analogue under l2, and `|.|^p / ||.||_p^p` under a
//! general `l_p`. The total mass lies in `[1, n]`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::points::PointSet;
use crate::rng::Rng;

/// Sparse per-coordinate sampling probabilities. Coordinates with
/// probability zero are not materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    d: usize,
    coords: Vec<usize>,
    probs: Vec<f64>,
    mass: f64,
    metric: Metric,
}

impl ProbabilityVector {
    pub fn from_dense(p: &[f64], metric: Metric) -> Result<Self> {
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter("probabilities must lie in [0, 1]".into()));
        }
        let (coords, probs): (Vec<usize>, Vec<f64>) = p
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0.0)
            .map(|(b, &x)| (b, x))
            .unzip();
        let mass = probs.iter().sum();
        Ok(ProbabilityVector {
            d: p.len(),
            coords,
            probs,
            mass,
            metric,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Number of coordinates with positive probability.
    pub fn support(&self) -> usize {
        self.coords.len()
    }

    pub fn get(&self, b: usize) -> f64 {
        match self.coords.binary_search(&b) {
            Ok(k) => self.probs[k],
            Err(_) => 0.0,
        }
    }

    /// `(coordinate, probability)` pairs with positive probability, ascending.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coords.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        for (b, p) in self.nonzero() {
            v[b] = p;
        }
        v
    }
}

/// One element of the sampled multiset `I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledIndex {
    pub coord: usize,
    pub prob: f64,
    pub round: usize,
}

const CHUNK: usize = 4096;

/// Max-ratio probabilities over all pairs of distinct points.
///
/// Pairs at distance zero are skipped. Fails when every pair coincides.
pub fn global_probabilities(points: &PointSet) -> Result<ProbabilityVector> {
    let n = points.n();
    let d = points.d();
    let metric = points.metric();
    let p = metric.exponent();
    let pow = move |x: f64| -> f64 {
        if p == 1.0 {
            x.abs()
        } else if p == 2.0 {
            x * x
        } else {
            x.abs().powf(p)
        }
    };

    // (i, j, 1 / ||c_i - c_j||_p^p) for every pair that is not a duplicate.
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let s: f64 = points
                .point(i)
                .iter()
                .zip(points.point(j))
                .map(|(a, b)| pow(a - b))
                .sum();
            (s > 0.0).then(|| (i, j, 1.0 / s))
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::DegeneratePointSet);
    }

    let mut dense = vec![0.0f64; d];
    dense
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(k, out)| {
            let lo = k * CHUNK;
            for &(i, j, inv) in &pairs {
                let a = &points.point(i)[lo..lo + out.len()];
                let b = &points.point(j)[lo..lo + out.len()];
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    let r = pow(x - y) * inv;
                    if r > *o {
                        *o = r;
                    }
                }
            }
            for o in out.iter_mut() {
                *o = o.min(1.0);
            }
        });
    ProbabilityVector::from_dense(&dense, metric)
}

/// `T` rounds; in each round every coordinate `b` joins the multiset
/// independently with probability `p(b)`.
pub fn sample_multiset(pv: &ProbabilityVector, rounds: usize, rng: &mut Rng) -> Vec<SampledIndex> {
    let mut out = Vec::with_capacity((rounds as f64 * pv.mass()).ceil() as usize);
    for round in 0..rounds {
        for (coord, prob) in pv.nonzero() {
            if rng.bernoulli(prob) {
                out.push(SampledIndex { coord, prob, round });
            }
        }
    }
    out
}

/// Contracts the interval between the two thresholds to a single point.
///
/// With `t1 <= t2`: values up to `t1` are unchanged, values in `(t1, t2]`
/// map to `t1`, and values above `t2` shift down by `t2 - t1`. Thresholds
/// given in the other order are swapped.
pub fn collapse(x: f64, tau1: f64, tau2: f64) -> f64 {
    let (lo, hi) = if tau1 <= tau2 { (tau1, tau2) } else { (tau2, tau1) };
    if x <= lo {
        x
    } else if x <= hi {
        lo
    } else {
        x - (hi - lo)
    }
}

/// Applies [`collapse`] coordinate-wise to every point, with thresholds
/// taken from points `i0` and `j0`. The images of those two points coincide.
pub fn collapse_pointset(points: &PointSet, i0: usize, j0: usize) -> Result<PointSet> {
    let n = points.n();
    if i0 >= n || j0 >= n {
        return Err(Error::InvalidParameter(format!("index out of range for n = {n}")));
    }
    if i0 == j0 {
        return Err(Error::InvalidParameter("collapse needs two distinct indices".into()));
    }
    let (a, b) = (points.point(i0), points.point(j0));
    if a == b {
        return Err(Error::ZeroDistancePair);
    }
    let coords: Vec<f64> = points
        .iter()
        .flat_map(|c| c.iter().zip(a).zip(b).map(|((&x, &t1), &t2)| collapse(x, t1, t2)))
        .collect();
    PointSet::new(points.d(), coords, points.metric())
}

/// Stored words by part. One word is one scalar or one index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpaceReport {
    pub parts: Vec<(&'static str, u64)>,
}

impl SpaceReport {
    pub fn push(&mut self, part: &'static str, words: u64) {
        self.parts.push((part, words));
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().map(|(_, w)| w).sum()
    }

    pub fn get(&self, part: &str) -> Option<u64> {
        self.parts.iter().find(|(p, _)| *p == part).map(|(_, w)| *w)
    }

    /// Layout of the near-linear structures: indices and probabilities per
    /// multiset entry, the `m x |I|` matrix and `n` sketched centers.
    pub fn linear(multiset: usize, m: usize, n: usize) -> Self {
        let (i, m, n) = (multiset as u64, m as u64, n as u64);
        SpaceReport {
            parts: vec![
                ("indices", i),
                ("probabilities", i),
                ("matrix", m * i),
                ("sketched_centers", n * m),
            ],
        }
    }
}

/// Anything that can account for its stored words.
pub trait SpaceAccounting {
    fn space_report(&self) -> SpaceReport;
}
