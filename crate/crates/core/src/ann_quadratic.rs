//! `O~(n^2)`-space approximate nearest neighbor for any `l_p`: one two-point
//! comparator per pair of centers, queried by a scan or by the square-root
//! tournament.

use rayon::prelude::*;

use crate::codec::{Reader, Writer};
use crate::comparator::{Decision, PairComparator, Rule, DEFAULT_CT};
use crate::error::{invalid, Error, Result};
use crate::params::Params;
use crate::points::PointSet;
use crate::probe::ProbeSource;
use crate::rng::Rng;
use crate::sampling::{SpaceAccounting, SpaceReport};
use crate::tournament::{log_log, scan_min, tournament_min, MinResult, ThreeWay, TwoWay};

/// Parameter preset with the default comparator constant.
pub fn default_params(epsilon: f64, delta: f64, seed: u64) -> Params {
    Params::new(epsilon, delta, DEFAULT_CT, 1.0, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Champion scan with the three-way rule; `n - 1` comparisons.
    Scan,
    /// Square-root tournament with the two-way rule; `O(n log log n)` comparisons.
    Tournament,
}

impl Strategy {
    /// Scan for `n <= 32`, tournament above.
    pub fn default_for(n: usize) -> Self {
        if n <= 32 {
            Strategy::Scan
        } else {
            Strategy::Tournament
        }
    }

    /// Per-comparator `(epsilon, delta)` that make the composed structure
    /// `(1+eps)`-approximate with probability `1 - delta`.
    pub fn pair_accuracy(self, n: usize, epsilon: f64, delta: f64) -> (f64, f64) {
        match self {
            Strategy::Scan => (epsilon, delta / (n * n).max(1) as f64),
            Strategy::Tournament => {
                let ll = log_log(n) as f64;
                (epsilon / ll, delta / (n as f64 * ll))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Entry {
    /// Identical centers: the lower index is reported nearer.
    Duplicate,
    Pair(PairComparator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticAnnStructure {
    n: usize,
    d: usize,
    p: f64,
    params: Params,
    strategy: Strategy,
    untruncated: bool,
    /// Entries for `(i, j)`, `i < j`, in lexicographic order.
    table: Vec<Entry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadraticAnswer {
    pub index: usize,
    pub comparisons: u64,
}

fn pair_slot(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl QuadraticAnnStructure {
    pub fn preprocess(points: &PointSet, params: &Params, strategy: Strategy, rng: &mut Rng) -> Result<Self> {
        Self::build(points, params, strategy, false, rng)
    }

    /// The l1 variant with untruncated comparators and the scan; correct only
    /// for queries inside every pair's scaled bounding box.
    pub fn preprocess_untruncated(points: &PointSet, params: &Params, rng: &mut Rng) -> Result<Self> {
        if points.metric().exponent() != 1.0 {
            return Err(Error::UnsupportedMetric("the untruncated variant is l1 only".into()));
        }
        Self::build(points, params, Strategy::Scan, true, rng)
    }

    fn build(points: &PointSet, params: &Params, strategy: Strategy, untruncated: bool, rng: &mut Rng) -> Result<Self> {
        let p = points.metric().exponent();
        params.validate(1.0)?;
        if !(p.is_finite() && p >= 1.0) {
            return Err(invalid(format!("p must be finite and >= 1, got {p}")));
        }
        let n = points.n();
        let (eps, delta) = strategy.pair_accuracy(n, params.epsilon, params.delta);
        let pair_params = Params {
            epsilon: eps,
            delta,
            ..*params
        };
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let base = rng.next_u64();
        let table = pairs
            .par_iter()
            .enumerate()
            .map(|(k, &(i, j))| {
                let (a, b) = (points.point(i), points.point(j));
                if a == b {
                    return Ok(Entry::Duplicate);
                }
                let mut r = Rng::derive(base, k as u64);
                let c = if untruncated {
                    PairComparator::build_strong(a, b, &pair_params, &mut r)?
                } else {
                    PairComparator::build(a, b, p, &pair_params, &mut r)?
                };
                Ok(Entry::Pair(c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuadraticAnnStructure {
            n,
            d: points.d(),
            p,
            params: *params,
            strategy,
            untruncated,
            table,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn comparator_count(&self) -> usize {
        self.table.len()
    }

    pub fn comparator(&self, i: usize, j: usize) -> Option<&PairComparator> {
        let (lo, hi) = (i.min(j), i.max(j));
        match self.table.get(pair_slot(self.n, lo, hi))? {
            Entry::Pair(c) => Some(c),
            Entry::Duplicate => None,
        }
    }

    /// Largest number of distinct coordinates any single comparator probes.
    pub fn max_pair_probes(&self) -> usize {
        self.table
            .iter()
            .map(|e| match e {
                Entry::Pair(c) => c.distinct_coords(),
                Entry::Duplicate => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// Decision of the stored comparator for `(i, j)`, oriented so that
    /// `NearerA` means `i`.
    fn decide<P: ProbeSource>(&self, i: usize, j: usize, q: &mut P, rule: Rule) -> Decision {
        let (lo, hi) = (i.min(j), i.max(j));
        let d = match &self.table[pair_slot(self.n, lo, hi)] {
            Entry::Duplicate => Decision::NearerA,
            Entry::Pair(c) => c.compare(q, rule).decision,
        };
        match (i < j, d) {
            (true, d) | (false, d @ Decision::Unknown) => d,
            (false, Decision::NearerA) => Decision::NearerB,
            (false, Decision::NearerB) => Decision::NearerA,
        }
    }

    /// Runs `strategy` over `[n]` with an arbitrary pairwise decision
    /// function (`NearerA` meaning the first argument).
    pub fn select<F>(&self, strategy: Strategy, mut decide: F) -> Result<MinResult>
    where
        F: FnMut(usize, usize, Rule) -> Decision,
    {
        let all: Vec<usize> = (0..self.n).collect();
        match strategy {
            Strategy::Scan => scan_min(&all, |i, j| match decide(i, j, Rule::ThreeWay) {
                Decision::NearerA => ThreeWay::First,
                Decision::NearerB => ThreeWay::Second,
                Decision::Unknown => ThreeWay::Unknown,
            }),
            Strategy::Tournament => tournament_min(&all, |i, j| match decide(i, j, Rule::TwoWay) {
                Decision::NearerB => TwoWay::Second,
                _ => TwoWay::First,
            }),
        }
    }

    pub fn query_with_strategy<P: ProbeSource>(&self, q: &mut P, strategy: Strategy) -> Result<QuadraticAnswer> {
        if q.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: q.dim(),
            });
        }
        let r = self.select(strategy, |i, j, rule| self.decide(i, j, q, rule))?;
        Ok(QuadraticAnswer {
            index: r.index,
            comparisons: r.comparisons,
        })
    }

    pub fn query<P: ProbeSource>(&self, q: &mut P) -> Result<QuadraticAnswer> {
        self.query_with_strategy(q, self.strategy)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(b"SDQP");
        w.u32(1);
        w.usize(self.n);
        w.usize(self.d);
        w.f64(self.p);
        crate::ann_linear::write_params(&mut w, &self.params);
        w.u8(match self.strategy {
            Strategy::Scan => 0,
            Strategy::Tournament => 1,
        });
        w.u8(self.untruncated as u8);
        w.usize(self.table.len());
        for e in &self.table {
            match e {
                Entry::Duplicate => w.u8(0),
                Entry::Pair(c) => {
                    w.u8(1);
                    c.write(&mut w);
                }
            }
        }
        w.buf
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(buf, b"SDQP")?;
        if r.u32()? != 1 {
            return Err(Error::Format("unsupported version".into()));
        }
        let n = r.usize()?;
        let d = r.usize()?;
        let p = r.f64()?;
        let params = crate::ann_linear::read_params(&mut r)?;
        let strategy = match r.u8()? {
            0 => Strategy::Scan,
            1 => Strategy::Tournament,
            t => return Err(Error::Format(format!("unknown strategy tag {t}"))),
        };
        let untruncated = r.u8()? != 0;
        let len = r.usize()?;
        if Some(len) != n.checked_mul(n.saturating_sub(1)).map(|x| x / 2) {
            return Err(Error::Format("pair table size does not match n".into()));
        }
        let table = (0..len)
            .map(|_| match r.u8()? {
                0 => Ok(Entry::Duplicate),
                1 => Ok(Entry::Pair(PairComparator::read(&mut r)?)),
                t => Err(Error::Format(format!("unknown entry tag {t}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Ok(QuadraticAnnStructure {
            n,
            d,
            p,
            params,
            strategy,
            untruncated,
            table,
        })
    }
}

impl SpaceAccounting for QuadraticAnnStructure {
    fn space_report(&self) -> SpaceReport {
        let words = self
            .table
            .iter()
            .map(|e| match e {
                Entry::Pair(c) => c.words(),
                Entry::Duplicate => 0,
            })
            .sum();
        SpaceReport {
            parts: vec![("comparators", words)],
        }
    }
}
