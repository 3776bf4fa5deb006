//! Oblivious linear sketches applied after coordinate selection: Cauchy
//! projections read back with a median estimator (l1) and sign
//! Johnson-Lindenstrauss projections read back with the Euclidean norm (l2).

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    Cauchy,
    SignJl,
}

impl ProjectionKind {
    pub(crate) fn tag(self) -> u8 {
        match self {
            ProjectionKind::Cauchy => 1,
            ProjectionKind::SignJl => 2,
        }
    }

    pub(crate) fn from_tag(t: u8) -> Result<Self> {
        match t {
            1 => Ok(ProjectionKind::Cauchy),
            2 => Ok(ProjectionKind::SignJl),
            _ => Err(Error::Format(format!("unknown projection tag {t}"))),
        }
    }
}

/// Dense `m x cols` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    m: usize,
    cols: usize,
    entries: Vec<f64>,
    kind: ProjectionKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Center(usize),
    Query,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SketchedPoint {
    pub values: Vec<f64>,
    pub origin: Origin,
}

impl SketchedPoint {
    pub fn new(values: Vec<f64>, origin: Origin) -> Self {
        SketchedPoint { values, origin }
    }
}

/// Samples an `m x cols` matrix: i.i.d. standard Cauchy entries, or i.i.d.
/// uniform signs scaled by `1/sqrt(m)`.
pub fn build_projection(kind: ProjectionKind, m: usize, cols: usize, rng: &mut Rng) -> Result<ProjectionMatrix> {
    if m == 0 {
        return Err(Error::InvalidParameter("sketch needs at least one row".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let entries = (0..m * cols)
        .map(|_| match kind {
            ProjectionKind::Cauchy => rng.cauchy(),
            ProjectionKind::SignJl => scale * rng.rademacher(),
        })
        .collect();
    Ok(ProjectionMatrix {
        m,
        cols,
        entries,
        kind,
    })
}

impl ProjectionMatrix {
    pub fn from_entries(kind: ProjectionKind, m: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if m == 0 || entries.len() != m * cols {
            return Err(Error::InvalidParameter(format!(
                "{} entries do not form a {m} x {cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ProjectionMatrix { m, cols, entries, kind })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> ProjectionKind {
        self.kind
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn words(&self) -> u64 {
        (self.m * self.cols) as u64
    }

    pub fn project(&self, v: &[f64], origin: Origin) -> Result<SketchedPoint> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(SketchedPoint::new(self.apply(v), origin))
    }

    pub(crate) fn apply(&self, v: &[f64]) -> Vec<f64> {
        if self.cols == 0 {
            return vec![0.0; self.m];
        }
        self.entries
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The estimator matching this projection kind.
    pub fn estimate(&self, x: &SketchedPoint, y: &SketchedPoint) -> Result<f64> {
        match self.kind {
            ProjectionKind::Cauchy => median_estimate(x, y),
            ProjectionKind::SignJl => l2_estimate(x, y),
        }
    }
}

/// Convenience wrapper for [`ProjectionMatrix::project`].
pub fn project(mat: &ProjectionMatrix, v: &[f64]) -> Result<SketchedPoint> {
    mat.project(v, Origin::Query)
}

fn check_len(x: &SketchedPoint, y: &SketchedPoint) -> Result<()> {
    if x.values.len() != y.values.len() {
        return Err(Error::DimensionMismatch {
            expected: x.values.len(),
            got: y.values.len(),
        });
    }
    Ok(())
}

/// Median of `|x_k - y_k|`. For an even count, the mean of the two middle
/// order statistics.
pub fn median_estimate(x: &SketchedPoint, y: &SketchedPoint) -> Result<f64> {
    check_len(x, y)?;
    Ok(median_abs_diff(&x.values, &y.values))
}

pub(crate) fn median_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    let mut diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - b).abs()).collect();
    median_in_place(&mut diffs)
}

pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    let k = v.len();
    if k == 0 {
        return 0.0;
    }
    let mid = k / 2;
    let (lower, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if k % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

/// Euclidean distance between two sketches.
pub fn l2_estimate(x: &SketchedPoint, y: &SketchedPoint) -> Result<f64> {
    check_len(x, y)?;
    Ok(l2_diff(&x.values, &y.values))
}

pub(crate) fn l2_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::rng::Rng;

    fn sp(v: &[f64]) -> SketchedPoint {
        SketchedPoint::new(v.to_vec(), Origin::Query)
    }

    #[test]
    fn empty_matrix_projects_to_zero() {
        let m = build_projection(ProjectionKind::Cauchy, 5, 0, &mut Rng::new(0)).unwrap();
        assert_eq!(m.project(&[], Origin::Query).unwrap().values, vec![0.0; 5]);
        assert_eq!(m.words(), 0);
        assert!(build_projection(ProjectionKind::Cauchy, 0, 3, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn sign_entries_have_fixed_magnitude() {
        let m = build_projection(ProjectionKind::SignJl, 16, 40, &mut Rng::new(1)).unwrap();
        assert!(m.entries().iter().all(|e| e * e == 1.0 / 16.0));
    }

    #[test]
    fn cauchy_entries_centered_at_zero() {
        let m = build_projection(ProjectionKind::Cauchy, 50, 50, &mut Rng::new(2)).unwrap();
        let mut e = m.entries().to_vec();
        let med = median_in_place(&mut e);
        assert!(med.abs() < 0.2, "{med}");
        assert!(m.entries().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn projection_basics() {
        let m = ProjectionMatrix::from_entries(ProjectionKind::SignJl, 1, 3, vec![1.0; 3]).unwrap();
        assert_eq!(project(&m, &[1.0, 2.0, 3.0]).unwrap().values, vec![6.0]);
        assert_eq!(project(&m, &[0.0; 3]).unwrap().values, vec![0.0]);
        assert!(project(&m, &[1.0]).is_err());
    }

    #[test]
    fn projection_is_linear() {
        let mut rng = Rng::new(3);
        let m = build_projection(ProjectionKind::Cauchy, 30, 20, &mut rng).unwrap();
        let v: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
        let w: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
        let pv = project(&m, &v).unwrap().values;
        let pw = project(&m, &w).unwrap().values;
        let twice: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        for (a, b) in project(&m, &twice).unwrap().values.iter().zip(&pv) {
            assert!((a - 2.0 * b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
        for ((s, a), b) in project(&m, &sum).unwrap().values.iter().zip(&pv).zip(&pw) {
            assert!((s - (a + b)).abs() <= 1e-9 * (a.abs() + b.abs()).max(1.0));
        }
    }

    #[test]
    fn median_cases() {
        assert_eq!(median_estimate(&sp(&[1.0, 2.0]), &sp(&[1.0, 2.0])).unwrap(), 0.0);
        assert_eq!(median_estimate(&sp(&[1.0, 5.0, 2.0]), &sp(&[0.0; 3])).unwrap(), 2.0);
        assert_eq!(median_estimate(&sp(&[1.0, 5.0, 2.0, 4.0]), &sp(&[0.0; 4])).unwrap(), 3.0);
        assert!(median_estimate(&sp(&[1.0]), &sp(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn l2_cases() {
        assert_eq!(l2_estimate(&sp(&[3.0, 4.0]), &sp(&[0.0, 0.0])).unwrap(), 5.0);
        assert_eq!(l2_estimate(&sp(&[3.0, 4.0]), &sp(&[3.0, 4.0])).unwrap(), 0.0);
        assert!(l2_estimate(&sp(&[1.0]), &sp(&[])).is_err());
    }

    fn accuracy(kind: ProjectionKind, m: usize, eps: f64, trials: u64) -> f64 {
        let d = 300;
        let mut hits = 0;
        for t in 0..trials {
            let mut rng = Rng::derive(99, t);
            let a: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let b: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let mat = build_projection(kind, m, d, &mut rng).unwrap();
            let est = mat
                .estimate(&project(&mat, &a).unwrap(), &project(&mat, &b).unwrap())
                .unwrap();
            let truth = match kind {
                ProjectionKind::Cauchy => a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>(),
                ProjectionKind::SignJl => l2_diff(&a, &b),
            };
            if (est - truth).abs() <= eps * truth {
                hits += 1;
            }
        }
        hits as f64 / trials as f64
    }

    #[test]
    fn cauchy_median_estimates_l1() {
        let rate = accuracy(ProjectionKind::Cauchy, (16.0f64 / 0.0625).round() as usize, 0.25, 200);
        assert!(rate >= 0.9, "{rate}");
    }

    #[test]
    fn sign_jl_estimates_l2() {
        let rate = accuracy(ProjectionKind::SignJl, (24.0f64 / 0.0625).round() as usize, 0.25, 200);
        assert!(rate >= 0.9, "{rate}");
    }

    proptest! {
        #[test]
        fn median_scale_equivariant(x in prop::collection::vec(-1e3f64..1e3, 1..20), k in -6i32..6, neg in any::<bool>()) {
            let alpha = if neg { -(2f64.powi(k)) } else { 2f64.powi(k) };
            let y: Vec<f64> = x.iter().map(|v| v * 0.5 - 1.0).collect();
            let base = median_abs_diff(&x, &y);
            let sx: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let sy: Vec<f64> = y.iter().map(|v| v * alpha).collect();
            prop_assert_eq!(median_abs_diff(&sx, &sy), alpha.abs() * base);
        }

        #[test]
        fn estimators_symmetric(x in prop::collection::vec(-1e3f64..1e3, 6), y in prop::collection::vec(-1e3f64..1e3, 6), z in prop::collection::vec(-1e3f64..1e3, 6)) {
            prop_assert_eq!(median_abs_diff(&x, &y), median_abs_diff(&y, &x));
            prop_assert_eq!(l2_diff(&x, &y), l2_diff(&y, &x));
            prop_assert!(l2_diff(&x, &z) <= (l2_diff(&x, &y) + l2_diff(&y, &z)) * (1.0 + 1e-12));
        }
    }
}
