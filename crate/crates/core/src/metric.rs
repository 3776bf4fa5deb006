use crate::error::{Error, Result};

/// Distance function over `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    L1,
    L2,
    /// General `l_p` norm, `1 <= p < inf`.
    Lp(f64),
}

impl Metric {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be finite and >= 1, got {p}")));
        }
        Ok(Metric::Lp(p))
    }

    /// The exponent of the norm.
    pub fn exponent(&self) -> f64 {
        match *self {
            Metric::L1 => 1.0,
            Metric::L2 => 2.0,
            Metric::Lp(p) => p,
        }
    }

    pub(crate) fn tag(&self) -> u8 {
        match self {
            Metric::L1 => 1,
            Metric::L2 => 2,
            Metric::Lp(_) => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8, p: f64) -> Result<Self> {
        match tag {
            1 => Ok(Metric::L1),
            2 => Ok(Metric::L2),
            3 => Metric::lp(p),
            _ => Err(Error::Format(format!("unknown metric tag {tag}"))),
        }
    }

    /// Distance without input validation; callers guarantee equal lengths.
    pub(crate) fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Metric::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Lp(p) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::L1 => write!(f, "l1"),
            Metric::L2 => write!(f, "l2"),
            Metric::Lp(p) => write!(f, "lp {p}"),
        }
    }
}

/// `(sum_b |a_b - b_b|^p)^(1/p)` with dimension and finiteness checks.
pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(metric.eval(a, b))
}
