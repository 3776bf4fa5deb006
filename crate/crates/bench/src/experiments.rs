//! One experiment per subcommand. Every experiment is deterministic given
//! its settings; trial `k` runs on the seed `Rng::derive(seed, k)`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use sdnn_core::ann_linear::{self, LinearAnnStructure, Profile};
use sdnn_core::ann_quadratic::{QuadraticAnnStructure, Strategy};
use sdnn_core::comparator::{self, truncate, truncation_bounds, PairComparator, Rule};
use sdnn_core::generate::{self, Instance};
use sdnn_core::oracle::{box_distance, exact_nn, exact_range, TrialReport, TrialSummary};
use sdnn_core::range_search::{self, RangeStructure};
use sdnn_core::sampling::{collapse_pointset, global_probabilities};
use sdnn_core::sketch::{build_projection, ProjectionKind};
use sdnn_core::tournament::{log_log, scan_min, tournament_min, ThreeWay, TwoWay};
use sdnn_core::{Error, Metric, Params, PointSet, ProbeSource, Rng, SpaceAccounting, VecProbe};

use crate::config::{Flags, GeneratorArg, MetricArg, ProfileArg, Settings, StrategyArg};
use crate::report::{Check, Op, Report, Row};
use crate::UsageError;

fn trial_seed(seed: u64, k: usize) -> u64 {
    Rng::derive(seed, k as u64).next_u64()
}

fn par_trials<T: Send>(s: &Settings, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..s.trials).into_par_iter().map(|k| f(trial_seed(s.seed, k))).collect()
}

fn load_points(path: &Path) -> Result<PointSet> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"SDNN") {
        Ok(PointSet::from_bytes(&bytes)?)
    } else {
        Ok(PointSet::read_text(bytes.as_slice())?)
    }
}

/// A query instance for the nearest-neighbor experiments.
fn instance(s: &Settings, metric: Metric, file: Option<&PointSet>, rng: &mut Rng) -> Result<Instance> {
    let gaussian_query = |points: PointSet, rng: &mut Rng| -> Result<Instance> {
        let query: Vec<f64> = (0..points.d()).map(|_| rng.normal()).collect();
        let nn = exact_nn(&points, &query)?.0;
        Ok(Instance { points, query, nn })
    };
    Ok(match s.generator {
        GeneratorArg::PlantedNn => generate::planted_nn(s.n, s.d, metric, s.gap, rng)?,
        GeneratorArg::Grid => generate::grid(s.n, s.d, s.delta_grid, metric, rng)?,
        GeneratorArg::Gaussian => gaussian_query(generate::gaussian(s.n, s.d, metric, rng)?, rng)?,
        GeneratorArg::BooleanCube => {
            let points = generate::boolean_cube(s.n, s.d, metric, rng)?;
            let query = (0..s.d).map(|_| (rng.next_u64() & 1) as f64).collect::<Vec<_>>();
            let nn = exact_nn(&points, &query)?.0;
            Instance { points, query, nn }
        }
        GeneratorArg::UnitVectors => gaussian_query(generate::unit_vectors(s.n, metric)?, rng)?,
        GeneratorArg::FromFile => {
            let points = file.context("--generator from-file needs --input")?.clone().with_metric(metric);
            let k = rng.below(points.n());
            let query: Vec<f64> = points.point(k).iter().map(|x| x + 0.1 * rng.normal()).collect();
            let nn = exact_nn(&points, &query)?.0;
            Instance { points, query, nn }
        }
    })
}

fn summary_row(label: &str, summary: &TrialSummary, s: &Settings) -> Row {
    let mut row = Row::new(label);
    row.set("trials", summary.trials.len() as f64)
        .set("success_rate", summary.success_rate)
        .set("mean_ratio", summary.mean_ratio)
        .set("max_ratio", summary.max_ratio)
        .set("mean_probes", summary.mean_probes)
        .set("mean_distinct_probes", summary.mean_distinct_probes)
        .set("max_distinct_probes", summary.max_distinct_probes as f64)
        .set("max_distinct_probe_fraction", summary.max_distinct_probes as f64 / s.d as f64)
        .set("mean_words", summary.mean_words)
        .set("max_words", summary.max_words as f64)
        .set("max_words_fraction", summary.max_words as f64 / (s.n * s.d) as f64);
    row
}

fn timed<T>(timing: bool, row_time: &mut Option<f64>, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    if timing {
        *row_time = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    out
}

/// Trial report plus multiset size, rounds, sketch rows and mass.
type LinearRun = (TrialReport, usize, usize, usize, f64);

/// Near-linear l1 or l2 structure on planted (or grid) instances.
pub fn ann_linear(flags: &Flags, metric_arg: MetricArg) -> Result<Report> {
    let metric_fixed = match metric_arg {
        MetricArg::L2 => Metric::L2,
        _ => Metric::L1,
    };
    let expected = flags.profile == Some(ProfileArg::Expected);
    let defaults = Settings {
        n: 10,
        d: 10_000,
        metric: metric_arg,
        p: metric_fixed.exponent(),
        eps: 0.25,
        delta: 0.2,
        ct: ann_linear::default_params(metric_fixed, 0.25, 0.2, 0).c_t,
        cm: ann_linear::default_params(metric_fixed, 0.25, 0.2, 0).c_m,
        trials: 400,
        generator: if expected { GeneratorArg::Grid } else { GeneratorArg::PlantedNn },
        ..Settings::default()
    };
    let mut s = defaults.with_flags(flags)?;
    s.metric = metric_arg;
    s.p = metric_fixed.exponent();
    let profile = match s.profile {
        ProfileArg::Hp => Profile::HighProbability,
        ProfileArg::Expected => {
            if !matches!(s.generator, GeneratorArg::Grid | GeneratorArg::BooleanCube | GeneratorArg::UnitVectors) {
                return Err(UsageError("the expected profile needs a bounded generator (grid)".into()).into());
            }
            Profile::ExpectedConstant {
                grid_bound: s.delta_grid as f64,
            }
        }
    };
    let file = flags.input.as_deref().map(load_points).transpose()?;
    let mut wall = None;
    let runs = timed(flags.timing, &mut wall, || {
        par_trials(&s, |ts| {
            let inst = instance(&s, metric_fixed, file.as_ref(), &mut Rng::derive(ts, 0))?;
            let params = Params::new(s.eps, s.delta, s.ct, s.cm, ts);
            let st = LinearAnnStructure::preprocess(&inst.points, &params, profile, &mut Rng::derive(ts, 1))?;
            let mut probe = VecProbe::new(&inst.query);
            let idx = st.query(&mut probe)?;
            let pc = st.probe_count();
            let words = st.space_report().total();
            let rep = TrialReport::score(ts, &inst.points, &inst.query, idx, s.eps, probe.probes(), pc.distinct as u64, words)?;
            Ok((rep, pc.multiset, st.rounds(), st.sketch_rows(), st.mass()))
        })
    })?;
    let n = s.n;
    let within = runs.iter().filter(|r| r.1 <= 2 * r.2 * n).count() as f64 / runs.len() as f64;
    let mean = |f: &dyn Fn(&LinearRun) -> f64| runs.iter().map(f).sum::<f64>() / runs.len() as f64;
    let mean_multiset = mean(&|r| r.1 as f64);
    let mean_mass = mean(&|r| r.4);
    let rounds = runs.iter().map(|r| r.2).max().unwrap_or(0);
    let rows_m = runs.iter().map(|r| r.3).max().unwrap_or(0);
    let max_multiset = runs.iter().map(|r| r.1).max().unwrap_or(0);
    let summary = TrialSummary::from_reports(runs.into_iter().map(|r| r.0).collect());

    let label = format!("linear-{}", if metric_fixed == Metric::L2 { "l2" } else { "l1" });
    let mut row = summary_row(&label, &summary, &s);
    row.set("rounds", rounds as f64)
        .set("sketch_rows", rows_m as f64)
        .set("mean_multiset", mean_multiset)
        .set("max_multiset", max_multiset as f64)
        .set("multiset_within_2tn", within)
        .set("mean_mass", mean_mass);
    if let Some(ms) = wall {
        row.set("wall_ms", ms);
    }
    let checks = match profile {
        Profile::HighProbability => vec![
            Check::new("success_rate", summary.success_rate, Op::Ge, 1.0 - s.delta - 0.05),
            Check::new("max_distinct_probe_fraction", row.get("max_distinct_probe_fraction").unwrap(), Op::Lt, 0.1),
            Check::new("max_words_fraction", row.get("max_words_fraction").unwrap(), Op::Lt, 0.1),
            Check::new("multiset_within_2tn", within, Op::Ge, 0.95),
        ],
        Profile::ExpectedConstant { .. } => vec![Check::new("mean_ratio", summary.mean_ratio, Op::Le, 8.0 + s.eps)],
    };
    Ok(Report::new(&format!("ann-{}", if metric_fixed == Metric::L2 { "l2" } else { "l1" }), s, vec![row], checks))
}

/// Quadratic-space structure for a general l_p norm.
pub fn ann_lp(flags: &Flags) -> Result<Report> {
    let defaults = Settings {
        n: 8,
        d: 2000,
        metric: MetricArg::Lp,
        p: 3.0,
        eps: 0.2,
        delta: 0.2,
        ct: comparator::DEFAULT_CT,
        trials: 300,
        generator: GeneratorArg::PlantedNn,
        ..Settings::default()
    };
    let mut s = defaults.with_flags(flags)?;
    s.metric = MetricArg::Lp;
    let metric = s.metric()?;
    let strategies: Vec<Strategy> = match s.strategy {
        StrategyArg::Scan => vec![Strategy::Scan],
        StrategyArg::Tournament => vec![Strategy::Tournament],
        StrategyArg::Both => vec![Strategy::Scan, Strategy::Tournament],
    };
    let file = flags.input.as_deref().map(load_points).transpose()?;
    let mut rows = vec![];
    let mut checks = vec![];
    for strategy in strategies {
        let name = match strategy {
            Strategy::Scan => "scan",
            Strategy::Tournament => "tournament",
        };
        let mut wall = None;
        let runs = timed(flags.timing, &mut wall, || {
            par_trials(&s, |ts| {
                let inst = instance(&s, metric, file.as_ref(), &mut Rng::derive(ts, 0))?;
                let params = Params::new(s.eps, s.delta, s.ct, s.cm, ts);
                let st = QuadraticAnnStructure::preprocess(&inst.points, &params, strategy, &mut Rng::derive(ts, 1))?;
                let mut probe = VecProbe::new(&inst.query).cached();
                let ans = st.query(&mut probe)?;
                let words = st.space_report().total();
                let rep = TrialReport::score(ts, &inst.points, &inst.query, ans.index, s.eps, probe.probes(), probe.probes(), words)?;
                Ok((rep, ans.comparisons))
            })
        })?;
        let cmp: Vec<u64> = runs.iter().map(|r| r.1).collect();
        let summary = TrialSummary::from_reports(runs.into_iter().map(|r| r.0).collect());
        let mut row = summary_row(&format!("quadratic-{name}"), &summary, &s);
        let (lo, hi) = (*cmp.iter().min().unwrap() as f64, *cmp.iter().max().unwrap() as f64);
        row.set("min_comparisons", lo)
            .set("max_comparisons", hi)
            .set("mean_comparisons", cmp.iter().sum::<u64>() as f64 / cmp.len() as f64);
        if let Some(ms) = wall {
            row.set("wall_ms", ms);
        }
        checks.push(Check::new(format!("{name}_success_rate"), summary.success_rate, Op::Ge, 1.0 - s.delta - 0.05));
        if strategy == Strategy::Scan {
            checks.push(Check::new("scan_min_comparisons", lo, Op::Eq, (s.n - 1) as f64));
            checks.push(Check::new("scan_max_comparisons", hi, Op::Eq, (s.n - 1) as f64));
        }
        rows.push(row);
    }
    Ok(Report::new("ann-lp", s, rows, checks))
}

/// Orthogonal range search on planted instances with one far center.
pub fn range(flags: &Flags) -> Result<Report> {
    let defaults = Settings {
        n: 10,
        d: 2000,
        eps: 0.25,
        delta: 0.1,
        ct: range_search::DEFAULT_CT,
        trials: 400,
        ..Settings::default()
    };
    let mut s = defaults.with_flags(flags)?;
    s.metric = MetricArg::L1;
    s.p = 1.0;
    let mut wall = None;
    let runs = timed(flags.timing, &mut wall, || {
        par_trials(&s, |ts| {
            let inst = generate::range_planted(s.n, s.d, s.eps, 1.05, &mut Rng::derive(ts, 0))?;
            let params = Params::new(s.eps, s.delta, s.ct, s.cm, ts);
            let st = RangeStructure::preprocess(&inst.points, &params, &mut Rng::derive(ts, 1))?;
            let (mut p1, mut p2) = (VecProbe::new(&inst.q1), VecProbe::new(&inst.q2));
            let w = st.query(&mut p1, &mut p2)?;
            let truth = exact_range(&inst.points, &inst.q1, &inst.q2)?;
            let missed = truth.iter().filter(|i| !w.contains(i)).count();
            let far: Vec<usize> = (0..s.n)
                .filter(|&i| box_distance(inst.points.point(i), &inst.q1, &inst.q2) > s.eps * inst.diameter)
                .collect();
            let any_far = far.iter().any(|i| w.contains(i));
            Ok((
                missed,
                w.contains(&inst.far),
                any_far,
                w.len(),
                p1.probes() + p2.probes(),
                st.space_report().total(),
                st.rounds(),
            ))
        })
    })?;
    let k = runs.len() as f64;
    let false_negatives = runs.iter().map(|r| r.0).sum::<usize>() as f64;
    let planted_far = runs.iter().filter(|r| r.1).count() as f64 / k;
    let any_far = runs.iter().filter(|r| r.2).count() as f64 / k;
    let mut row = Row::new("range");
    row.set("trials", k)
        .set("false_negatives", false_negatives)
        .set("planted_far_inclusion_rate", planted_far)
        .set("far_inclusion_rate", any_far)
        .set("mean_reported", runs.iter().map(|r| r.3).sum::<usize>() as f64 / k)
        .set("mean_probes", runs.iter().map(|r| r.4).sum::<u64>() as f64 / k)
        .set("mean_words", runs.iter().map(|r| r.5).sum::<u64>() as f64 / k)
        .set("rounds", runs.iter().map(|r| r.6).max().unwrap_or(0) as f64);
    if let Some(ms) = wall {
        row.set("wall_ms", ms);
    }
    let checks = vec![
        Check::new("false_negatives", false_negatives, Op::Eq, 0.0),
        Check::new("far_inclusion_rate", any_far, Op::Le, s.delta + 0.05),
    ];
    Ok(Report::new("range", s, vec![row], checks))
}

/// Rounding allowance for the mass bounds. The bounds are exact identities
/// that summation in floating point can miss by a few ulps.
pub const MASS_TOL: f64 = 1e-9;

/// Mass of the global probability vector, with 0 for a set of identical points.
fn mass_or_zero(points: &PointSet) -> Result<f64> {
    match global_probabilities(points) {
        Ok(pv) => Ok(pv.mass()),
        Err(Error::DegeneratePointSet) => Ok(0.0),
        Err(e) => Err(e.into()),
    }
}

/// Sampling-mass bound on random instances, plus the collapse recurrence.
pub fn mass_bound(flags: &Flags) -> Result<Report> {
    let defaults = Settings {
        instances: 200,
        ..Settings::default()
    };
    let s = defaults.with_flags(flags)?;
    let mut rows = vec![];
    let mut checks = vec![];
    for (label, metric) in [("l1", Metric::L1), ("l2", Metric::L2)] {
        let masses: Vec<(f64, usize)> = (0..s.instances)
            .into_par_iter()
            .map(|k| {
                let mut rng = Rng::derive(trial_seed(s.seed, k), metric.exponent() as u64);
                let d = 2 + rng.below(1999);
                let mut n = 2 + rng.below(29);
                let points = if k % 2 == 0 {
                    generate::gaussian(n, d, metric, &mut rng)?
                } else {
                    if d < 5 {
                        n = n.min(1 << d);
                    }
                    generate::boolean_cube(n, d, metric, &mut rng)?
                };
                Ok((global_probabilities(&points)?.mass(), n))
            })
            .collect::<Result<_>>()?;
        let violations = masses.iter().filter(|(m, n)| !(*m >= 1.0 - MASS_TOL && *m <= *n as f64 + MASS_TOL)).count();
        let mut row = Row::new(format!("mass-{label}"));
        row.set("instances", masses.len() as f64)
            .set("violations", violations as f64)
            .set("min_mass_minus_one", masses.iter().map(|m| m.0 - 1.0).fold(f64::INFINITY, f64::min))
            .set("min_mass", masses.iter().map(|m| m.0).fold(f64::INFINITY, f64::min))
            .set("max_mass_over_n", masses.iter().map(|(m, n)| m / *n as f64).fold(0.0, f64::max));
        checks.push(Check::new(format!("{label}_mass_violations"), violations as f64, Op::Eq, 0.0));
        rows.push(row);
    }

    // Collapsing the closest pair drops the mass by at most one.
    let gaps: Vec<f64> = (0..s.instances.min(100))
        .into_par_iter()
        .map(|k| {
            let mut rng = Rng::derive(trial_seed(s.seed ^ 0x5eed, k), 0);
            let n = 2 + rng.below(14);
            let d = 2 + rng.below(199);
            let points = generate::gaussian(n, d, Metric::L1, &mut rng)?;
            let mut best = (0, 1, f64::INFINITY);
            for i in 0..n {
                for j in i + 1..n {
                    let dij = points.dist(i, j);
                    if dij < best.2 {
                        best = (i, j, dij);
                    }
                }
            }
            let collapsed = collapse_pointset(&points, best.0, best.1)?;
            Ok(mass_or_zero(&points)? - mass_or_zero(&collapsed)? - 1.0)
        })
        .collect::<Result<_>>()?;
    let violations = gaps.iter().filter(|&&g| g > MASS_TOL).count();
    let mut row = Row::new("collapse-l1");
    row.set("instances", gaps.len() as f64)
        .set("violations", violations as f64)
        .set("max_excess", gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    checks.push(Check::new("collapse_violations", violations as f64, Op::Eq, 0.0));
    rows.push(row);
    Ok(Report::new("mass-bound", s, rows, checks))
}

/// Accuracy of the Cauchy median and sign-JL sketches.
pub fn sketch_quality(flags: &Flags) -> Result<Report> {
    let defaults = Settings {
        d: 300,
        eps: 0.25,
        delta: 0.1,
        cm: 8.0,
        trials: 200,
        ..Settings::default()
    };
    let s = defaults.with_flags(flags)?;
    let m = (s.cm * (1.0 / s.delta).ln() / (s.eps * s.eps)).ceil() as usize;
    let mut rows = vec![];
    let mut checks = vec![];
    for (label, kind, metric) in [
        ("cauchy", ProjectionKind::Cauchy, Metric::L1),
        ("sign-jl", ProjectionKind::SignJl, Metric::L2),
    ] {
        let hits = par_trials(&s, |ts| {
            let mut rng = Rng::derive(ts, kind as u64);
            let a: Vec<f64> = (0..s.d).map(|_| rng.normal()).collect();
            let b: Vec<f64> = (0..s.d).map(|_| rng.normal()).collect();
            let mat = build_projection(kind, m, s.d, &mut rng)?;
            let est = mat.estimate(
                &mat.project(&a, sdnn_core::sketch::Origin::Query)?,
                &mat.project(&b, sdnn_core::sketch::Origin::Query)?,
            )?;
            let truth = sdnn_core::distance(&a, &b, metric)?;
            Ok(((est - truth).abs() < s.eps * truth) as u8 as f64)
        })?;
        let rate = hits.iter().sum::<f64>() / hits.len() as f64;
        let mut row = Row::new(label);
        row.set("m", m as f64).set("trials", hits.len() as f64).set("within_rate", rate);
        checks.push(Check::new(format!("{label}_within_rate"), rate, Op::Ge, 1.0 - s.delta));
        rows.push(row);
    }
    Ok(Report::new("sketch-quality", s, rows, checks))
}

fn lp_dist(a: &[f64], b: &[f64], p: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `x` scaled to l_p norm `r`.
fn with_norm(x: &[f64], p: f64, r: f64) -> Vec<f64> {
    let norm = x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
    x.iter().map(|v| v * r / norm).collect()
}

/// Truncation ratio preservation and two-point comparator accuracy.
pub fn comparator(flags: &Flags) -> Result<Report> {
    let defaults = Settings {
        d: 500,
        metric: MetricArg::Lp,
        eps: 0.2,
        delta: 0.1,
        ct: comparator::DEFAULT_CT,
        trials: 400,
        instances: 1000,
        ..Settings::default()
    };
    let s = defaults.with_flags(flags)?;
    let (trunc_ps, cmp_ps) = match flags.p {
        Some(p) => (vec![p], vec![p]),
        None => (vec![1.0, 1.5, 2.0, 3.0], vec![1.0, 2.0, 3.0]),
    };
    let mut rows = vec![];
    let mut checks = vec![];

    for &p in &trunc_ps {
        let dim = 20;
        let violations: usize = (0..s.instances)
            .into_par_iter()
            .map(|k| {
                let mut rng = Rng::derive(trial_seed(s.seed, k), 100 + (p * 10.0) as u64);
                loop {
                    let a: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
                    let b: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
                    let q: Vec<f64> = (0..dim).map(|_| 2.0 * rng.normal()).collect();
                    let (da, db) = (lp_dist(&q, &a, p), lp_dist(&q, &b, p));
                    let (near, far, ratio) = if da <= db { (&a, &b, db / da) } else { (&b, &a, da / db) };
                    if ratio < 1.0 + s.eps {
                        continue;
                    }
                    let t: Vec<f64> = (0..dim)
                        .map(|i| {
                            let (l, u) = truncation_bounds(near[i], far[i], p, s.eps).expect("valid p and eps");
                            truncate(q[i], l, u)
                        })
                        .collect();
                    let (ta, tb) = (lp_dist(&t, near, p), lp_dist(&t, far, p));
                    // A truncated query on top of the nearer point has infinite ratio.
                    let kept = ta == 0.0 || tb / ta >= ratio;
                    return (!kept) as usize;
                }
            })
            .sum();
        let mut row = Row::new(format!("truncation-p{p}"));
        row.set("triples", s.instances as f64).set("violations", violations as f64);
        checks.push(Check::new(format!("truncation_p{p}_violations"), violations as f64, Op::Eq, 0.0));
        rows.push(row);
    }

    for &p in &cmp_ps {
        let runs = par_trials(&s, |ts| {
            let mut rng = Rng::derive(ts, 0);
            let q: Vec<f64> = (0..s.d).map(|_| rng.normal()).collect();
            let dir = |rng: &mut Rng| (0..s.d).map(|_| rng.normal()).collect::<Vec<f64>>();
            let far_dist = (1.0 + s.eps) * (1.0 + rng.uniform());
            let ua = with_norm(&dir(&mut rng), p, 1.0);
            let ub = with_norm(&dir(&mut rng), p, far_dist);
            let a: Vec<f64> = q.iter().zip(&ua).map(|(x, y)| x + y).collect();
            let b: Vec<f64> = q.iter().zip(&ub).map(|(x, y)| x + y).collect();
            let swap = rng.bernoulli(0.5);
            let (first, second) = if swap { (&b, &a) } else { (&a, &b) };
            let params = Params::new(s.eps, s.delta, s.ct, s.cm, ts);
            let c = PairComparator::build(first, second, p, &params, &mut Rng::derive(ts, 1))?;
            let out = c.compare(&mut VecProbe::new(&q), Rule::TwoWay);
            let correct = (out.decision == sdnn_core::Decision::NearerA) != swap;
            let bound = c.term_bound();
            let range_bad = c
                .terms(&mut VecProbe::new(&q))
                .iter()
                .filter(|t| !(0.0 <= t.x && t.x <= bound && 0.0 <= t.y && t.y <= bound))
                .count();
            Ok((correct, range_bad, c.rounds(), c.distinct_coords()))
        })?;
        let k = runs.len() as f64;
        let rate = runs.iter().filter(|r| r.0).count() as f64 / k;
        let bad = runs.iter().map(|r| r.1).sum::<usize>() as f64;
        let mut row = Row::new(format!("comparator-p{p}"));
        row.set("trials", k)
            .set("correct_rate", rate)
            .set("range_violations", bad)
            .set("rounds", runs.iter().map(|r| r.2).max().unwrap_or(0) as f64)
            .set("mean_distinct_coords", runs.iter().map(|r| r.3).sum::<usize>() as f64 / k);
        checks.push(Check::new(format!("comparator_p{p}_correct_rate"), rate, Op::Ge, 1.0 - s.delta - 0.05));
        checks.push(Check::new(format!("comparator_p{p}_range_violations"), bad, Op::Eq, 0.0));
        rows.push(row);
    }
    Ok(Report::new("comparator", s, rows, checks))
}

/// Comparison counts of the scan and the tournament with an exact comparator.
pub fn tournament(flags: &Flags) -> Result<Report> {
    let defaults = Settings {
        trials: 20,
        ..Settings::default()
    };
    let s = defaults.with_flags(flags)?;
    let sizes: Vec<usize> = match flags.n {
        Some(n) => vec![n],
        None => vec![16, 64, 256],
    };
    let mut rows = vec![];
    let mut checks = vec![];
    let mut fitted: Option<f64> = None;
    for &n in &sizes {
        let runs = par_trials(&s, |ts| {
            let mut rng = Rng::new(ts);
            let vals: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let idx: Vec<usize> = (0..n).collect();
            let best = (0..n).fold(0, |b, i| if vals[i] < vals[b] { i } else { b });
            let t = tournament_min(&idx, |i, j| if vals[i] <= vals[j] { TwoWay::First } else { TwoWay::Second })?;
            let sc = scan_min(&idx, |i, j| if vals[i] <= vals[j] { ThreeWay::First } else { ThreeWay::Second })?;
            Ok((t.index == best && sc.index == best, t.comparisons, sc.comparisons))
        })?;
        let count = runs.iter().map(|r| r.1).max().unwrap_or(0) as f64;
        let scan = runs.iter().map(|r| r.2).max().unwrap_or(0) as f64;
        let exact = runs.iter().filter(|r| r.0).count() as f64 / runs.len() as f64;
        let scale = n as f64 * log_log(n) as f64;
        let c = *fitted.get_or_insert(count / scale);
        let mut row = Row::new(format!("n{n}"));
        row.set("n", n as f64)
            .set("tournament_comparisons", count)
            .set("scan_comparisons", scan)
            .set("loglog", log_log(n) as f64)
            .set("fitted_c", c)
            .set("exact_rate", exact);
        checks.push(Check::new(format!("n{n}_tournament_bound"), count, Op::Le, c * scale));
        checks.push(Check::new(format!("n{n}_scan_comparisons"), scan, Op::Eq, (n - 1) as f64));
        checks.push(Check::new(format!("n{n}_exact_rate"), exact, Op::Eq, 1.0));
        rows.push(row);
    }
    Ok(Report::new("tournament", s, rows, checks))
}

/// Stored words as `n` and `d` grow.
pub fn space_scaling(flags: &Flags) -> Result<Report> {
    let defaults = Settings {
        eps: 0.25,
        delta: 0.2,
        trials: 5,
        ..Settings::default()
    };
    let s = defaults.with_flags(flags)?;
    let mut rows = vec![];
    let mut checks = vec![];
    let mut fraction_at_largest = 0.0;
    for d in [1_000usize, 10_000, 100_000] {
        for n in [10usize, 20] {
            let cfg = Settings { n, d, ..s.clone() };
            let words = par_trials(&cfg, |ts| {
                let inst = generate::planted_nn(n, d, Metric::L1, 2.0, &mut Rng::derive(ts, 0))?;
                let params = ann_linear::default_params(Metric::L1, s.eps, s.delta, ts);
                let st = LinearAnnStructure::preprocess(&inst.points, &params, Profile::HighProbability, &mut Rng::derive(ts, 1))?;
                Ok(st.space_report().total() as f64)
            })?;
            let mean = words.iter().sum::<f64>() / words.len() as f64;
            let mut row = Row::new(format!("linear-l1-n{n}-d{d}"));
            row.set("n", n as f64).set("d", d as f64).set("mean_words", mean).set("words_fraction", mean / (n * d) as f64);
            if d == 100_000 && n == 20 {
                fraction_at_largest = mean / (n * d) as f64;
            }
            rows.push(row);
        }
    }
    checks.push(Check::new("linear_words_fraction_n20_d100000", fraction_at_largest, Op::Lt, 0.05));

    let mut quad = vec![];
    for n in [8usize, 16] {
        let cfg = Settings { n, ..s.clone() };
        let words = par_trials(&cfg, |ts| {
            let points = generate::gaussian(n, 64, Metric::Lp(3.0), &mut Rng::derive(ts, 0))?;
            let params = Params::new(0.2, 0.2, comparator::DEFAULT_CT, 1.0, ts);
            let st = QuadraticAnnStructure::preprocess(&points, &params, Strategy::Scan, &mut Rng::derive(ts, 1))?;
            Ok(st.space_report().total() as f64)
        })?;
        let mean = words.iter().sum::<f64>() / words.len() as f64;
        let mut row = Row::new(format!("quadratic-l3-n{n}-d64"));
        row.set("n", n as f64).set("d", 64.0).set("mean_words", mean);
        quad.push(mean);
        rows.push(row);
    }
    let ratio = quad[1] / quad[0];
    checks.push(Check::new("quadratic_words_ratio_min", ratio, Op::Ge, 3.5));
    checks.push(Check::new("quadratic_words_ratio_max", ratio, Op::Le, 4.5));
    Ok(Report::new("space-scaling", s, rows, checks))
}

/// Writes a generated point set; planted and grid instances also write the
/// designated query to `<out>.query`.
pub fn gen(flags: &Flags) -> Result<Settings> {
    let s = Settings {
        generator: GeneratorArg::Gaussian,
        ..Settings::default()
    }
    .with_flags(flags)?;
    let metric = s.metric()?;
    let out = flags.out.as_ref().ok_or_else(|| UsageError("gen needs --out".into()))?;
    let mut rng = Rng::new(s.seed);
    let (points, query) = match s.generator {
        GeneratorArg::Gaussian => (generate::gaussian(s.n, s.d, metric, &mut rng)?, None),
        GeneratorArg::BooleanCube => (generate::boolean_cube(s.n, s.d, metric, &mut rng)?, None),
        GeneratorArg::UnitVectors => (generate::unit_vectors(s.n, metric)?, None),
        GeneratorArg::PlantedNn => {
            let i = generate::planted_nn(s.n, s.d, metric, s.gap, &mut rng)?;
            (i.points, Some(i.query))
        }
        GeneratorArg::Grid => {
            let i = generate::grid(s.n, s.d, s.delta_grid, metric, &mut rng)?;
            (i.points, Some(i.query))
        }
        GeneratorArg::FromFile => bail!(UsageError("gen cannot use --generator from-file".into())),
    };
    let binary = out.extension().is_some_and(|e| e == "bin");
    let write = |path: &Path, ps: &PointSet| -> Result<()> {
        if binary {
            fs::write(path, ps.to_bytes())?;
        } else {
            let mut buf = Vec::new();
            ps.write_text(&mut buf)?;
            fs::write(path, buf)?;
        }
        Ok(())
    };
    write(out, &points)?;
    if let Some(q) = query {
        let mut path = out.as_os_str().to_owned();
        path.push(".query");
        write(Path::new(&path), &PointSet::new(q.len(), q, metric)?)?;
    }
    Ok(s)
}

