//! Approximate orthogonal range search under l1 by checking box containment
//! on a sampled set of coordinates.

use crate::codec::{Reader, Writer};
use crate::error::{invalid, Error, Result};
use crate::params::{ceil_count, Params};
use crate::points::PointSet;
use crate::probe::ProbeSource;
use crate::rng::Rng;
use crate::sampling::{global_probabilities, sample_multiset, SpaceAccounting, SpaceReport};

pub const DEFAULT_CT: f64 = 1.0;

pub fn default_params(epsilon: f64, delta: f64, seed: u64) -> Params {
    Params::new(epsilon, delta, DEFAULT_CT, 1.0, seed)
}

/// `T = ceil(c_t * ln(n / delta) / epsilon)`.
pub fn range_rounds(n: usize, params: &Params) -> Result<usize> {
    ceil_count(params.c_t, (n as f64 / params.delta).ln().max(0.0) / params.epsilon)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeStructure {
    n: usize,
    d: usize,
    params: Params,
    rounds: usize,
    multiset: usize,
    coords: Vec<usize>,
    /// `n x coords.len()`, raw center values on the sampled coordinates.
    values: Vec<f64>,
}

impl RangeStructure {
    pub fn preprocess(points: &PointSet, params: &Params, rng: &mut Rng) -> Result<Self> {
        params.validate(1.0)?;
        let rounds = range_rounds(points.n(), params)?;
        Self::with_rounds(points, params, rounds, rng)
    }

    /// Build with an explicit number of sampling rounds.
    pub fn with_rounds(points: &PointSet, params: &Params, rounds: usize, rng: &mut Rng) -> Result<Self> {
        if points.metric().exponent() != 1.0 {
            return Err(Error::UnsupportedMetric(format!("range search needs l1, got {}", points.metric())));
        }
        if points.n() < 2 {
            return Err(invalid("range search needs at least two centers"));
        }
        let pv = global_probabilities(points)?;
        let sampled = sample_multiset(&pv, rounds, rng);
        let mut coords: Vec<usize> = sampled.iter().map(|s| s.coord).collect();
        coords.sort_unstable();
        coords.dedup();
        let values = points
            .iter()
            .flat_map(|c| coords.iter().map(move |&z| c[z]))
            .collect();
        Ok(RangeStructure {
            n: points.n(),
            d: points.d(),
            params: *params,
            rounds,
            multiset: sampled.len(),
            coords,
            values,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Size of the sampled multiset `I`.
    pub fn multiset_size(&self) -> usize {
        self.multiset
    }

    pub fn distinct_coords(&self) -> &[usize] {
        &self.coords
    }

    /// Indices whose stored coordinates all lie between `q1` and `q2`.
    /// Boundary values count as inside.
    pub fn query<P1: ProbeSource, P2: ProbeSource>(&self, q1: &mut P1, q2: &mut P2) -> Result<Vec<usize>> {
        for dim in [q1.dim(), q2.dim()] {
            if dim != self.d {
                return Err(Error::DimensionMismatch { expected: self.d, got: dim });
            }
        }
        let bounds: Vec<(f64, f64)> = self
            .coords
            .iter()
            .map(|&z| {
                let (a, b) = (q1.read(z), q2.read(z));
                (a.min(b), a.max(b))
            })
            .collect();
        let k = self.coords.len();
        Ok((0..self.n)
            .filter(|&i| {
                self.values[i * k..(i + 1) * k]
                    .iter()
                    .zip(&bounds)
                    .all(|(&c, &(lo, hi))| lo <= c && c <= hi)
            })
            .collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new(b"SDRS");
        w.u32(1);
        w.usize(self.n);
        w.usize(self.d);
        crate::ann_linear::write_params(&mut w, &self.params);
        w.usize(self.rounds);
        w.usize(self.multiset);
        w.usizes(&self.coords);
        w.f64s(&self.values);
        w.buf
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader::new(buf, b"SDRS")?;
        if r.u32()? != 1 {
            return Err(Error::Format("unsupported version".into()));
        }
        let n = r.usize()?;
        let d = r.usize()?;
        let params = crate::ann_linear::read_params(&mut r)?;
        let rounds = r.usize()?;
        let multiset = r.usize()?;
        let coords = r.usizes()?;
        let values = r.f64s()?;
        r.finish()?;
        if coords.iter().any(|&z| z >= d) || Some(values.len()) != n.checked_mul(coords.len()) {
            return Err(Error::Format("inconsistent range structure".into()));
        }
        Ok(RangeStructure {
            n,
            d,
            params,
            rounds,
            multiset,
            coords,
            values,
        })
    }
}

impl SpaceAccounting for RangeStructure {
    fn space_report(&self) -> SpaceReport {
        SpaceReport {
            parts: vec![
                ("indices", self.coords.len() as u64),
                ("centers", self.values.len() as u64),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use crate::probe::VecProbe;
    use proptest::prelude::*;
    use crate::rng::Rng;

    fn gaussian(n: usize, d: usize, seed: u64) -> PointSet {
        let mut rng = Rng::new(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.normal()).collect()).collect();
        PointSet::from_rows(&rows, Metric::L1).unwrap()
    }

    fn params() -> Params {
        default_params(0.25, 0.1, 0)
    }

    #[test]
    fn two_points_differing_in_one_coordinate() {
        let ps = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]], Metric::L1).unwrap();
        for seed in 0..20 {
            let s = RangeStructure::preprocess(&ps, &params(), &mut Rng::new(seed)).unwrap();
            assert!(s.distinct_coords().iter().all(|&z| z == 0));
        }
    }

    #[test]
    fn zero_rounds_reports_everything() {
        let ps = gaussian(5, 20, 1);
        let s = RangeStructure::with_rounds(&ps, &params(), 0, &mut Rng::new(0)).unwrap();
        assert!(s.distinct_coords().is_empty());
        let (a, b) = (vec![100.0; 20], vec![101.0; 20]);
        assert_eq!(s.query(&mut VecProbe::new(&a), &mut VecProbe::new(&b)).unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn rejects_bad_input() {
        let ps = gaussian(5, 20, 1);
        assert!(RangeStructure::preprocess(&ps.clone().with_metric(Metric::L2), &params(), &mut Rng::new(0)).is_err());
        let same = PointSet::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]], Metric::L1).unwrap();
        assert!(matches!(
            RangeStructure::preprocess(&same, &params(), &mut Rng::new(0)),
            Err(Error::DegeneratePointSet)
        ));
        let s = RangeStructure::preprocess(&ps, &params(), &mut Rng::new(0)).unwrap();
        let short = [0.0; 3];
        let full = [0.0; 20];
        assert!(s.query(&mut VecProbe::new(&short), &mut VecProbe::new(&full)).is_err());
    }

    #[test]
    fn round_count() {
        let p = params();
        let t = range_rounds(10, &p).unwrap();
        assert_eq!(t, (100f64.ln() / 0.25).ceil() as usize);
    }

    #[test]
    fn degenerate_box_at_a_center() {
        let ps = gaussian(6, 50, 2);
        let s = RangeStructure::preprocess(&ps, &params(), &mut Rng::new(3)).unwrap();
        for i in 0..6 {
            let c = ps.point(i);
            let w = s.query(&mut VecProbe::new(c), &mut VecProbe::new(c)).unwrap();
            assert!(w.contains(&i));
        }
    }

    #[test]
    fn probes_each_distinct_coordinate_once_per_corner() {
        let ps = gaussian(6, 200, 4);
        let s = RangeStructure::preprocess(&ps, &params(), &mut Rng::new(5)).unwrap();
        let (a, b) = (vec![-1.0; 200], vec![1.0; 200]);
        let (mut p1, mut p2) = (VecProbe::new(&a), VecProbe::new(&b));
        s.query(&mut p1, &mut p2).unwrap();
        assert_eq!(p1.probes() as usize, s.distinct_coords().len());
        assert_eq!(p2.probes() as usize, s.distinct_coords().len());
    }

    #[test]
    fn multiset_within_twice_expected() {
        let ps = gaussian(10, 500, 6);
        let mass = global_probabilities(&ps).unwrap().mass();
        let mut ok = 0;
        for seed in 0..100 {
            let s = RangeStructure::preprocess(&ps, &params(), &mut Rng::new(seed)).unwrap();
            assert!(mass <= 10.0);
            if s.multiset_size() <= 2 * s.rounds() * 10 {
                ok += 1;
            }
        }
        assert!(ok >= 95);
    }

    #[test]
    fn serialization_round_trips() {
        let ps = gaussian(4, 30, 7);
        let s = RangeStructure::preprocess(&ps, &params(), &mut Rng::new(8)).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"SDRS");
        assert_eq!(RangeStructure::from_bytes(&bytes).unwrap(), s);
        assert!(RangeStructure::from_bytes(&bytes[1..]).is_err());
    }

    proptest! {
        #[test]
        fn no_false_negatives_and_monotone(seed in 0u64..500, grow in 0.0f64..2.0) {
            let ps = gaussian(6, 40, seed);
            let s = RangeStructure::preprocess(&ps, &params(), &mut Rng::new(seed)).unwrap();
            let mut rng = Rng::new(seed ^ 0xabc);
            let lo: Vec<f64> = (0..40).map(|_| rng.normal() - 1.0).collect();
            let hi: Vec<f64> = lo.iter().map(|x| x + 2.0 * rng.uniform()).collect();
            let w = s.query(&mut VecProbe::new(&lo), &mut VecProbe::new(&hi)).unwrap();
            for i in 0..6 {
                let inside = ps.point(i).iter().zip(&lo).zip(&hi).all(|((c, l), h)| l <= c && c <= h);
                if inside {
                    prop_assert!(w.contains(&i));
                }
            }
            let lo2: Vec<f64> = lo.iter().map(|x| x - grow).collect();
            let hi2: Vec<f64> = hi.iter().map(|x| x + grow).collect();
            // Corners given in swapped order must not matter.
            let w2 = s.query(&mut VecProbe::new(&hi2), &mut VecProbe::new(&lo2)).unwrap();
            for i in &w {
                prop_assert!(w2.contains(i));
            }
        }
    }
}
