//! Cross-module invariants checked with proptest.

use proptest::prelude::*;

use sdnn_core::ann_linear::{self, LinearAnnStructure, Profile};
use sdnn_core::comparator::{PairComparator, Rule};
use sdnn_core::oracle::{approximation_ratio, exact_nn};
use sdnn_core::range_search::{self, RangeStructure};
use sdnn_core::sampling::{collapse_pointset, global_probabilities};
use sdnn_core::{Decision, Metric, Params, PointSet, VecProbe};

fn point_set(metric: Metric) -> impl Strategy<Value = PointSet> {
    (2usize..8, 1usize..30).prop_flat_map(move |(n, d)| {
        prop::collection::vec(-50i32..50, n * d)
            .prop_map(move |v| PointSet::new(d, v.into_iter().map(f64::from).collect(), metric).unwrap())
    })
}

fn distinct(ps: &PointSet) -> bool {
    (0..ps.n()).any(|i| (i + 1..ps.n()).any(|j| ps.point(i) != ps.point(j)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_lies_between_one_and_n(ps in point_set(Metric::L1), l2 in any::<bool>()) {
        let ps = if l2 { ps.with_metric(Metric::L2) } else { ps };
        prop_assume!(distinct(&ps));
        let pv = global_probabilities(&ps).unwrap();
        prop_assert!(pv.mass() >= 1.0 - 1e-9 && pv.mass() <= ps.n() as f64 + 1e-9);
        prop_assert!(pv.to_dense().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn collapsing_the_closest_pair_costs_at_most_one(ps in point_set(Metric::L1)) {
        prop_assume!(distinct(&ps));
        let mut best = None;
        for i in 0..ps.n() {
            for j in i + 1..ps.n() {
                let d = ps.dist(i, j);
                if d > 0.0 && best.is_none_or(|(_, _, b)| d < b) {
                    best = Some((i, j, d));
                }
            }
        }
        let (i, j, _) = best.unwrap();
        let before = global_probabilities(&ps).unwrap().mass();
        let after = collapse_pointset(&ps, i, j).unwrap();
        let after = global_probabilities(&after).map(|pv| pv.mass()).unwrap_or(0.0);
        prop_assert!(before <= after + 1.0 + 1e-9, "{} > {} + 1", before, after);
    }

    #[test]
    fn linear_answers_are_valid_indices(ps in point_set(Metric::L1), seed in any::<u64>(), q in prop::collection::vec(-60.0f64..60.0, 30)) {
        let params = ann_linear::default_params(Metric::L1, 0.25, 0.2, seed);
        let s = LinearAnnStructure::preprocess(&ps, &params, Profile::HighProbability, &mut sdnn_core::Rng::new(seed)).unwrap();
        let q = &q[..ps.d()];
        let i = s.query(&mut VecProbe::new(q)).unwrap();
        prop_assert!(i < ps.n());
        prop_assert!(approximation_ratio(&ps, q, i).unwrap() >= 1.0 - 1e-12);
        let (nn, _) = exact_nn(&ps, q).unwrap();
        prop_assert_eq!(approximation_ratio(&ps, q, nn).unwrap(), 1.0);
    }

    #[test]
    fn comparator_is_antisymmetric_under_swap(seed in any::<u64>(), p in 1.0f64..4.0, v in prop::collection::vec(-5.0f64..5.0, 30)) {
        let (a, rest) = v.split_at(10);
        let (b, q) = rest.split_at(10);
        prop_assume!(a != b);
        let params = Params::new(0.2, 0.1, 0.05, 1.0, seed);
        let ab = PairComparator::build(a, b, p, &params, &mut sdnn_core::Rng::new(seed)).unwrap();
        let ba = PairComparator::build(b, a, p, &params, &mut sdnn_core::Rng::new(seed)).unwrap();
        let x = ab.compare(&mut VecProbe::new(q), Rule::ThreeWay);
        let y = ba.compare(&mut VecProbe::new(q), Rule::ThreeWay);
        let flipped = match y.decision {
            Decision::NearerA => Decision::NearerB,
            Decision::NearerB => Decision::NearerA,
            Decision::Unknown => Decision::Unknown,
        };
        prop_assert_eq!(x.decision, flipped);
    }

    #[test]
    fn range_never_misses_and_grows_with_the_box(ps in point_set(Metric::L1), seed in any::<u64>(), w in 0.0f64..30.0, extra in 0.0f64..10.0) {
        prop_assume!(distinct(&ps));
        let params = range_search::default_params(0.25, 0.1, seed);
        let s = RangeStructure::preprocess(&ps, &params, &mut sdnn_core::Rng::new(seed)).unwrap();
        let c = ps.point((seed % ps.n() as u64) as usize);
        let lo: Vec<f64> = c.iter().map(|x| x - w).collect();
        let hi: Vec<f64> = c.iter().map(|x| x + w).collect();
        let inner = s.query(&mut VecProbe::new(&lo), &mut VecProbe::new(&hi)).unwrap();
        for i in sdnn_core::oracle::exact_range(&ps, &lo, &hi).unwrap() {
            prop_assert!(inner.contains(&i));
        }
        let lo2: Vec<f64> = lo.iter().map(|x| x - extra).collect();
        let hi2: Vec<f64> = hi.iter().map(|x| x + extra).collect();
        let outer = s.query(&mut VecProbe::new(&lo2), &mut VecProbe::new(&hi2)).unwrap();
        prop_assert!(inner.iter().all(|i| outer.contains(i)));
    }
}
