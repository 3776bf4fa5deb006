//! Two-point comparators: given probe access to `q`, decide which of two
//! stored centers `a`, `b` is nearer.
//!
//! Coordinates are drawn `T` times with probability proportional to
//! `|b(i) - a(i)|^p`; only the drawn coordinates of `a` and `b` are kept. At
//! query time each probed value is first truncated into an interval around
//! `[a(i), b(i)]`, which never shrinks a distance ratio that already exceeds
//! `1 + eps`, and the normalized terms `X_t = |q'(i) - a(i)|^p / |b(i) - a(i)|^p`
//! and `Y_t` (same with `b`) are summed.
//!
//! The untruncated l1 variant with a three-way answer is the "strong"
//! comparator: it may answer [`Decision::Unknown`], but when `q` lies in the
//! scaled bounding box of the pair it never names the farther point.

use crate::codec::{Reader, Writer};
use crate::error::{invalid, Error, Result};
use crate::params::{ceil_count, Params};
use crate::probe::ProbeSource;
use crate::rng::Rng;

/// Default `c_t` for pairwise comparators.
pub const DEFAULT_CT: f64 = 0.05;

/// Half-width multiplier of the scaled bounding box around a pair.
pub const BOX_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    NearerA,
    NearerB,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// `a` iff `x <= y`.
    TwoWay,
    /// `a` if `y/x >= 1 + eps/2`, `b` if `x/y >= 1 + eps/2`, otherwise unknown.
    ThreeWay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOutcome {
    pub decision: Decision,
    pub x: f64,
    pub y: f64,
}

/// Per-coordinate contribution to the estimators, before multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coord: usize,
    pub count: u64,
    pub x: f64,
    pub y: f64,
}

/// `(1+eps)^(p/(p-1)) - 1`, the relative width of the truncation margin.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn truncation_threshold(p: f64, epsilon: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!(
            "truncation threshold needs 1 < p < inf, got {p}; p = 1 truncates to [a, b]"
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok((1.0 + epsilon).powf(p / (p - 1.0)) - 1.0)
}

/// Clamps `x` into `[l, u]`.
pub fn truncate(x: f64, l: f64, u: f64) -> f64 {
    if x <= l {
        l
    } else if x >= u {
        u
    } else {
        x
    }
}

/// Truncation interval for one coordinate, oriented so that `lo <= hi`.
pub fn truncation_bounds(a: f64, b: f64, p: f64, epsilon: f64) -> Result<(f64, f64)> {
    if p == 1.0 {
        return Ok((a.min(b), a.max(b)));
    }
    let m = truncation_threshold(p, epsilon)?;
    let l = a - (b - a) / m;
    let u = a + (1.0 + 1.0 / m) * (b - a);
    Ok((l.min(u), l.max(u)))
}

/// Whether `q` lies in the box `[min(a,b) - 100|a-b|, max(a,b) + 100|a-b|]`
/// on every coordinate. Verification helper for the untruncated comparator.
pub fn in_scaled_box(a: &[f64], b: &[f64], q: &[f64]) -> bool {
    a.iter().zip(b).zip(q).all(|((&x, &y), &z)| {
        let w = BOX_SCALE * (x - y).abs();
        x.min(y) - w <= z && z <= x.max(y) + w
    })
}

/// Draw count `T` for a truncated l_p comparator.
pub fn pair_rounds(p: f64, epsilon: f64, delta: f64, c_t: f64) -> Result<usize> {
    ceil_count(c_t, (1.0 / delta).ln() * 2f64.powf(p) / epsilon.powf(p + 2.0))
}

/// Draw count `T` for the untruncated l1 comparator.
pub fn strong_rounds(epsilon: f64, delta: f64, c_t: f64) -> Result<usize> {
    ceil_count(c_t, (1.0 / delta).ln() / (epsilon * epsilon))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairComparator {
    p: f64,
    epsilon: f64,
    delta: f64,
    rounds: usize,
    truncated: bool,
    coords: Vec<usize>,
    counts: Vec<u64>,
    a: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn validate_pair(a: &[f64], b: &[f64], p: f64, params: &Params) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("p must be finite and >= 1, got {p}")));
    }
    params.validate(1.0)?;
    if a == b {
        return Err(Error::ZeroDistancePair);
    }
    Ok(())
}

impl PairComparator {
    /// Truncated l_p comparator with `T = ceil(c_t log(1/delta) 2^p / eps^(p+2))` draws.
    pub fn build(a: &[f64], b: &[f64], p: f64, params: &Params, rng: &mut Rng) -> Result<Self> {
        validate_pair(a, b, p, params)?;
        let rounds = pair_rounds(p, params.epsilon, params.delta, params.c_t)?;
        Self::sample(a, b, p, params, rounds, true, rng)
    }

    /// Untruncated l1 comparator with `T = ceil(c_t log(1/delta) / eps^2)`
    /// draws, meant for the three-way rule under the bounding-box assumption.
    pub fn build_strong(a: &[f64], b: &[f64], params: &Params, rng: &mut Rng) -> Result<Self> {
        validate_pair(a, b, 1.0, params)?;
        let rounds = strong_rounds(params.epsilon, params.delta, params.c_t)?;
        Self::sample(a, b, 1.0, params, rounds, false, rng)
    }

    fn sample(a: &[f64], b: &[f64], p: f64, params: &Params, rounds: usize, truncated: bool, rng: &mut Rng) -> Result<Self> {
        let weighted: Vec<(usize, f64)> = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| (i, (x - y).abs().powf(p)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        // Multinomial(T, w / sum w) drawn as a chain of conditional binomials.
        let mut suffix: Vec<f64> = vec![0.0; weighted.len() + 1];
        for k in (0..weighted.len()).rev() {
            suffix[k] = suffix[k + 1] + weighted[k].1;
        }
        let mut left = rounds as u64;
        let mut cmp = PairComparator {
            p,
            epsilon: params.epsilon,
            delta: params.delta,
            rounds,
            truncated,
            coords: vec![],
            counts: vec![],
            a: vec![],
            b: vec![],
            lo: vec![],
            hi: vec![],
        };
        for (k, &(i, w)) in weighted.iter().enumerate() {
            if left == 0 {
                break;
            }
            let c = if k + 1 == weighted.len() {
                left
            } else {
                rng.binomial(left, (w / suffix[k]).min(1.0))
            };
            if c == 0 {
                continue;
            }
            left -= c;
            let (lo, hi) = if truncated {
                truncation_bounds(a[i], b[i], p, params.epsilon)?
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            cmp.coords.push(i);
            cmp.counts.push(c);
            cmp.a.push(a[i]);
            cmp.b.push(b[i]);
            cmp.lo.push(lo);
            cmp.hi.push(hi);
        }
        Ok(cmp)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Distinct sampled coordinates with their draw counts.
    pub fn sampled(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.coords.iter().copied().zip(self.counts.iter().copied())
    }

    /// Probes issued by one comparison.
    pub fn distinct_coords(&self) -> usize {
        self.coords.len()
    }

    /// Index, count, both centers' values and both thresholds per distinct coordinate.
    pub fn words(&self) -> u64 {
        6 * self.coords.len() as u64
    }

    /// Upper bound on a single `X_t` or `Y_t` after truncation.
    pub fn term_bound(&self) -> f64 {
        if self.p == 1.0 {
            1.0
        } else {
            (1.0 + 1.0 / self.epsilon).powf(self.p)
        }
    }

    /// Probes each sampled coordinate once and returns its normalized terms.
    pub fn terms<P: ProbeSource>(&self, q: &mut P) -> Vec<Term> {
        (0..self.coords.len())
            .map(|k| {
                let v = truncate(q.read(self.coords[k]), self.lo[k], self.hi[k]);
                let scale = (self.b[k] - self.a[k]).abs().powf(self.p);
                Term {
                    coord: self.coords[k],
                    count: self.counts[k],
                    x: (v - self.a[k]).abs().powf(self.p) / scale,
                    y: (self.b[k] - v).abs().powf(self.p) / scale,
                }
            })
            .collect()
    }

    pub fn compare<P: ProbeSource>(&self, q: &mut P, rule: Rule) -> CompareOutcome {
        let (x, y) = self
            .terms(q)
            .iter()
            .fold((0.0, 0.0), |(x, y), t| (x + t.count as f64 * t.x, y + t.count as f64 * t.y));
        CompareOutcome {
            decision: decide(x, y, self.epsilon, rule),
            x,
            y,
        }
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        w.f64(self.p);
        w.f64(self.epsilon);
        w.f64(self.delta);
        w.usize(self.rounds);
        w.u8(self.truncated as u8);
        w.usizes(&self.coords);
        w.usize(self.counts.len());
        for &c in &self.counts {
            w.u64(c);
        }
        w.f64s(&self.a);
        w.f64s(&self.b);
        w.f64s(&self.lo);
        w.f64s(&self.hi);
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let p = r.f64()?;
        let epsilon = r.f64()?;
        let delta = r.f64()?;
        let rounds = r.usize()?;
        let truncated = r.u8()? != 0;
        let coords = r.usizes()?;
        let k = r.usize()?;
        if k != coords.len() {
            return Err(Error::Format("comparator count length mismatch".into()));
        }
        let counts = (0..k).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let cmp = PairComparator {
            p,
            epsilon,
            delta,
            rounds,
            truncated,
            coords,
            counts,
            a: r.f64s()?,
            b: r.f64s()?,
            lo: r.f64s()?,
            hi: r.f64s()?,
        };
        if [cmp.a.len(), cmp.b.len(), cmp.lo.len(), cmp.hi.len()]
            .iter()
            .any(|&l| l != k)
        {
            return Err(Error::Format("comparator column length mismatch".into()));
        }
        Ok(cmp)
    }
}

fn decide(x: f64, y: f64, epsilon: f64, rule: Rule) -> Decision {
    match rule {
        Rule::TwoWay => {
            if x <= y {
                Decision::NearerA
            } else {
                Decision::NearerB
            }
        }
        Rule::ThreeWay => {
            let factor = 1.0 + epsilon / 2.0;
            // Also covers x = y = 0.
            if y >= factor * x {
                Decision::NearerA
            } else if x >= factor * y {
                Decision::NearerB
            } else {
                Decision::Unknown
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use crate::probe::VecProbe;

    fn params(eps: f64, delta: f64) -> Params {
        Params::new(eps, delta, 1.0, 1.0, 0)
    }

    #[test]
    fn threshold_values() {
        assert!((truncation_threshold(2.0, 0.1).unwrap() - 0.21).abs() < 1e-12);
        assert_eq!(truncation_threshold(2.0, 0.0).unwrap(), 0.0);
        assert!((truncation_threshold(3.0, 0.1).unwrap() - (1.1f64.powf(1.5) - 1.0)).abs() < 1e-15);
        assert!((truncation_threshold(3.0, 0.1).unwrap() - 0.153689).abs() < 1e-6);
        assert!(truncation_threshold(1.0, 0.1).is_err());
        assert!(truncation_threshold(0.5, 0.1).is_err());
    }

    #[test]
    fn truncate_cases() {
        assert_eq!(truncate(0.5, 0.0, 1.0), 0.5);
        assert_eq!(truncate(-3.0, 0.0, 1.0), 0.0);
        assert_eq!(truncate(9.0, 0.0, 1.0), 1.0);
        assert_eq!(truncate(9.0, 2.0, 2.0), 2.0);
    }

    #[test]
    fn bounds_are_oriented() {
        assert_eq!(truncation_bounds(3.0, 1.0, 1.0, 0.1).unwrap(), (1.0, 3.0));
        let (lo, hi) = truncation_bounds(1.0, 0.0, 2.0, 0.1).unwrap();
        assert!((lo - (0.0 - 1.0 / 0.21)).abs() < 1e-12);
        assert!((hi - (1.0 + 1.0 / 0.21)).abs() < 1e-12);
    }

    #[test]
    fn rejects_identical_points() {
        let r = PairComparator::build(&[1.0, 2.0], &[1.0, 2.0], 2.0, &params(0.1, 0.1), &mut Rng::new(0));
        assert!(matches!(r, Err(Error::ZeroDistancePair)));
        assert!(PairComparator::build(&[1.0], &[2.0], 2.0, &params(1.5, 0.1), &mut Rng::new(0)).is_err());
    }

    #[test]
    fn single_differing_coordinate_takes_every_draw() {
        let a = [0.0, 1.0, 2.0];
        let b = [0.0, 4.0, 2.0];
        let c = PairComparator::build(&a, &b, 2.0, &params(0.1, 0.1), &mut Rng::new(0)).unwrap();
        let s: Vec<_> = c.sampled().collect();
        assert_eq!(s, vec![(1, c.rounds() as u64)]);
    }

    #[test]
    fn draw_frequencies_follow_weights() {
        let a = [0.0, 0.0, 0.0, 0.0];
        let b = [1.0, 2.0, 0.0, 3.0];
        for p in [1.0, 2.0] {
            let params = Params::new(0.5, 0.5, 1.0, 1.0, 0);
            let c = PairComparator::sample(&a, &b, p, &params, 10_000, true, &mut Rng::new(2)).unwrap();
            let w: Vec<f64> = b.iter().map(|x: &f64| x.powf(p)).collect();
            let total: f64 = w.iter().sum();
            let mut seen = [0u64; 4];
            for (i, k) in c.sampled() {
                seen[i] = k;
            }
            assert_eq!(seen.iter().sum::<u64>(), 10_000);
            for i in 0..4 {
                assert!((seen[i] as f64 / 1e4 - w[i] / total).abs() < 0.05);
            }
        }
    }

    #[test]
    fn equal_weights_split_evenly() {
        let params = Params::new(0.2, 0.1, 1.0, 1.0, 0);
        let c = PairComparator::sample(&[0.0, 0.0], &[1.0, 1.0], 1.0, &params, 20_000, true, &mut Rng::new(5)).unwrap();
        let s: Vec<_> = c.sampled().collect();
        assert_eq!(s.len(), 2);
        assert!((s[0].1 as f64 / 20_000.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn query_at_a_gives_zero_x() {
        let a = [0.0, 1.0, -1.0];
        let b = [2.0, 0.0, 1.0];
        for p in [1.0, 2.0, 3.0] {
            let c = PairComparator::build(&a, &b, p, &params(0.05, 0.1), &mut Rng::new(3)).unwrap();
            for rule in [Rule::TwoWay, Rule::ThreeWay] {
                let o = c.compare(&mut VecProbe::new(&a), rule);
                assert_eq!(o.x, 0.0);
                assert_eq!(o.decision, Decision::NearerA);
            }
        }
    }

    #[test]
    fn midpoint_is_a_tie() {
        let d = 6;
        let a = vec![0.0; d];
        let b = vec![1.0; d];
        let q = vec![0.5; d];
        let c = PairComparator::build(&a, &b, 1.0, &params(0.2, 0.1), &mut Rng::new(4)).unwrap();
        let two = c.compare(&mut VecProbe::new(&q), Rule::TwoWay);
        assert_eq!(two.x, two.y);
        assert_eq!(two.decision, Decision::NearerA);
        assert_eq!(c.compare(&mut VecProbe::new(&q), Rule::ThreeWay).decision, Decision::Unknown);
    }

    #[test]
    fn probes_each_sampled_coordinate_once() {
        let mut rng = Rng::new(6);
        let a: Vec<f64> = (0..200).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..200).map(|_| rng.normal()).collect();
        let q: Vec<f64> = (0..200).map(|_| rng.normal()).collect();
        let c = PairComparator::build(&a, &b, 2.0, &params(0.1, 0.1), &mut rng).unwrap();
        let mut probe = VecProbe::new(&q).traced();
        c.compare(&mut probe, Rule::TwoWay);
        assert_eq!(probe.probes() as usize, c.distinct_coords());
        let coords: Vec<usize> = c.sampled().map(|(i, _)| i).collect();
        assert_eq!(probe.trace().unwrap(), &coords[..]);
    }

    #[test]
    fn swapping_pair_swaps_estimators() {
        let mut rng = Rng::new(7);
        let a: Vec<f64> = (0..50).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..50).map(|_| rng.normal()).collect();
        for _ in 0..20 {
            let q: Vec<f64> = (0..50).map(|_| 2.0 * rng.normal()).collect();
            let ab = PairComparator::build(&a, &b, 3.0, &params(0.05, 0.2), &mut Rng::new(9)).unwrap();
            let ba = PairComparator::build(&b, &a, 3.0, &params(0.05, 0.2), &mut Rng::new(9)).unwrap();
            let o1 = ab.compare(&mut VecProbe::new(&q), Rule::TwoWay);
            let o2 = ba.compare(&mut VecProbe::new(&q), Rule::TwoWay);
            assert!((o1.x - o2.y).abs() <= 1e-9 * o1.x.max(1.0));
            assert!((o1.y - o2.x).abs() <= 1e-9 * o1.y.max(1.0));
            if o1.x != o1.y {
                assert_ne!(o1.decision, o2.decision);
            }
        }
    }

    #[test]
    fn terms_bounded_after_truncation() {
        let mut rng = Rng::new(8);
        for p in [1.0, 1.5, 2.0, 3.0] {
            for _ in 0..50 {
                let a: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
                let b: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
                let q: Vec<f64> = (0..20).map(|_| 50.0 * rng.normal()).collect();
                let c = PairComparator::build(&a, &b, p, &params(0.2, 0.3), &mut rng).unwrap();
                let bound = c.term_bound();
                for t in c.terms(&mut VecProbe::new(&q)) {
                    assert!(t.x >= 0.0 && t.x <= bound * (1.0 + 1e-12));
                    assert!(t.y >= 0.0 && t.y <= bound * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn full_truncation_preserves_ratio() {
        let mut rng = Rng::new(10);
        let eps = 0.05;
        for p in [1.0, 1.5, 2.0, 3.0] {
            let metric = Metric::Lp(p);
            let mut checked = 0;
            while checked < 300 {
                let d = 1 + rng.below(12);
                let a: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
                let b: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
                let s = rng.range(-1.0, 2.0);
                let q: Vec<f64> = (0..d).map(|i| a[i] + s * (b[i] - a[i]) + 3.0 * rng.normal()).collect();
                let ratio = metric.eval(&a, &q) / metric.eval(&b, &q);
                if ratio < 1.0 + eps {
                    continue;
                }
                checked += 1;
                let t: Vec<f64> = (0..d)
                    .map(|i| {
                        let (lo, hi) = truncation_bounds(a[i], b[i], p, eps).unwrap();
                        truncate(q[i], lo, hi)
                    })
                    .collect();
                let after = metric.eval(&a, &t) / metric.eval(&b, &t);
                assert!(after >= ratio * (1.0 - 1e-12), "p={p}: {after} < {ratio}");
            }
        }
    }

    #[test]
    fn strong_comparator_is_untruncated() {
        let a = [0.0, 0.0];
        let b = [1.0, 1.0];
        let c = PairComparator::build_strong(&a, &b, &params(0.2, 0.1), &mut Rng::new(0)).unwrap();
        assert!(!c.is_truncated());
        assert_eq!(c.rounds(), strong_rounds(0.2, 0.1, 1.0).unwrap());
        // Far outside [a, b] the raw values are used.
        let o = c.compare(&mut VecProbe::new(&[-10.0, -10.0]), Rule::ThreeWay);
        assert_eq!(o.decision, Decision::NearerA);
        assert!((o.y / o.x - 11.0 / 10.0).abs() < 1e-12);
        assert!(in_scaled_box(&a, &b, &[-10.0, 50.0]));
        assert!(!in_scaled_box(&a, &b, &[-101.0, 0.0]));
    }

    #[test]
    fn three_way_thresholds() {
        assert_eq!(decide(1.0, 1.1, 0.2, Rule::ThreeWay), Decision::NearerA);
        assert_eq!(decide(1.0, 1.09, 0.2, Rule::ThreeWay), Decision::Unknown);
        assert_eq!(decide(1.1, 1.0, 0.2, Rule::ThreeWay), Decision::NearerB);
        assert_eq!(decide(0.0, 0.0, 0.2, Rule::ThreeWay), Decision::NearerA);
        assert_eq!(decide(0.0, 1.0, 0.2, Rule::ThreeWay), Decision::NearerA);
        assert_eq!(decide(2.0, 2.0, 0.2, Rule::TwoWay), Decision::NearerA);
        assert_eq!(decide(2.0, 1.0, 0.2, Rule::TwoWay), Decision::NearerB);
    }
}
