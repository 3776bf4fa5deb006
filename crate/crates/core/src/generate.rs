//! Synthetic instance generators. Everything is deterministic given the `Rng`.

use std::collections::HashSet;

use crate::error::{invalid, Result};
use crate::metric::Metric;
use crate::oracle::{box_diameter, exact_nn};
use crate::points::PointSet;
use crate::rng::Rng;

/// I.i.d. standard normal coordinates.
pub fn gaussian(n: usize, d: usize, metric: Metric, rng: &mut Rng) -> Result<PointSet> {
    let coords = (0..n * d).map(|_| rng.normal()).collect();
    PointSet::new(d, coords, metric)
}

/// `n` distinct points of `{0,1}^d`.
pub fn boolean_cube(n: usize, d: usize, metric: Metric, rng: &mut Rng) -> Result<PointSet> {
    if d < 63 && n as u64 > 1u64 << d {
        return Err(invalid(format!("{n} distinct points do not fit in {{0,1}}^{d}")));
    }
    let mut seen = HashSet::new();
    let mut coords = Vec::with_capacity(n * d);
    while seen.len() < n {
        let row: Vec<u8> = (0..d).map(|_| (rng.next_u64() & 1) as u8).collect();
        if seen.insert(row.clone()) {
            coords.extend(row.into_iter().map(f64::from));
        }
    }
    PointSet::new(d, coords, metric)
}

/// The standard basis vectors `e_1..e_n` in `R^n`.
pub fn unit_vectors(n: usize, metric: Metric) -> Result<PointSet> {
    let mut coords = vec![0.0; n * n];
    for i in 0..n {
        coords[i * n + i] = 1.0;
    }
    PointSet::new(n, coords, metric)
}

/// A point set with a designated query and its exact nearest neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub points: PointSet,
    pub query: Vec<f64>,
    pub nn: usize,
}

/// Query `q` with dense Gaussian coordinates; center `i` is `q + a_i * s_i`
/// with a random sign vector `s_i`, so every coordinate matters equally.
/// One center, at a random index, sits at distance exactly 1 (up to
/// rounding); the others at `gap * (1 + U/2)` with `U` uniform on (0, 1).
pub fn planted_nn(n: usize, d: usize, metric: Metric, gap: f64, rng: &mut Rng) -> Result<Instance> {
    if !(gap >= 1.0 && gap.is_finite()) {
        return Err(invalid(format!("gap must be >= 1, got {gap}")));
    }
    if n == 0 || d == 0 {
        return Err(invalid("planted instance needs n, d >= 1"));
    }
    let p = metric.exponent();
    let unit = (d as f64).powf(-1.0 / p);
    let query: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    let nn = rng.below(n);
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        let dist = if i == nn { 1.0 } else { gap * (1.0 + 0.5 * rng.uniform()) };
        let a = dist * unit;
        coords.extend(query.iter().map(|&x| x + a * rng.rademacher()));
    }
    Ok(Instance {
        points: PointSet::new(d, coords, metric)?,
        query,
        nn,
    })
}

/// Integer centers uniform in `[-bound, bound]^d`; the query is a random
/// center with about half of its coordinates resampled.
pub fn grid(n: usize, d: usize, bound: u32, metric: Metric, rng: &mut Rng) -> Result<Instance> {
    if bound == 0 {
        return Err(invalid("grid bound must be >= 1"));
    }
    let b = bound as usize;
    let draw = |rng: &mut Rng| rng.below(2 * b + 1) as f64 - bound as f64;
    let coords: Vec<f64> = (0..n * d).map(|_| draw(rng)).collect();
    let points = PointSet::new(d, coords, metric)?;
    let k = rng.below(n);
    let query: Vec<f64> = points
        .point(k)
        .iter()
        .map(|&x| if rng.bernoulli(0.5) { draw(rng) } else { x })
        .collect();
    let (nn, _) = exact_nn(&points, &query)?;
    Ok(Instance { points, query, nn })
}

/// An l1 range-search instance: center 0 lies inside the box, center 1 is
/// outside it at box distance `excess * epsilon * diam`, concentrated on a
/// few coordinates, and the remaining centers are Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeInstance {
    pub points: PointSet,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub inside: usize,
    pub far: usize,
    pub diameter: f64,
}

pub fn range_planted(n: usize, d: usize, epsilon: f64, excess: f64, rng: &mut Rng) -> Result<RangeInstance> {
    if n < 2 || d == 0 {
        return Err(invalid("range instance needs n >= 2 and d >= 1"));
    }
    if !(epsilon > 0.0 && excess > 1.0) {
        return Err(invalid("need epsilon > 0 and excess > 1"));
    }
    let center: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    let half: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
    let q1: Vec<f64> = center.iter().zip(&half).map(|(c, w)| c - w).collect();
    let q2: Vec<f64> = center.iter().zip(&half).map(|(c, w)| c + w).collect();
    let diameter = box_diameter(&q1, &q2);

    let spread = (d / 100).clamp(1, d);
    let mut idx: Vec<usize> = (0..d).collect();
    rng.shuffle(&mut idx);
    let each = excess * epsilon * diameter / spread as f64;
    let mut far = center.clone();
    for &z in &idx[..spread] {
        far[z] = if rng.bernoulli(0.5) { q2[z] + each } else { q1[z] - each };
    }

    let mut coords = Vec::with_capacity(n * d);
    coords.extend_from_slice(&center);
    coords.extend_from_slice(&far);
    for _ in 2..n {
        coords.extend((0..d).map(|_| 3.0 * rng.normal()));
    }
    Ok(RangeInstance {
        points: PointSet::new(d, coords, Metric::L1)?,
        q1,
        q2,
        inside: 0,
        far: 1,
        diameter,
    })
}
