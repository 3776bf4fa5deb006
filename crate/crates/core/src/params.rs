use crate::error::{invalid, Result};

/// Accuracy, failure probability and the constants standing in for the
/// hidden `O(.)` factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub epsilon: f64,
    pub delta: f64,
    /// Multiplier on the number of sampling rounds `T`.
    pub c_t: f64,
    /// Multiplier on the number of sketch rows `m`.
    pub c_m: f64,
    pub seed: u64,
}

impl Params {
    pub fn new(epsilon: f64, delta: f64, c_t: f64, c_m: f64, seed: u64) -> Self {
        Params {
            epsilon,
            delta,
            c_t,
            c_m,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_constants(mut self, c_t: f64, c_m: f64) -> Self {
        self.c_t = c_t;
        self.c_m = c_m;
        self
    }

    /// Checks `0 < epsilon < eps_max`, `0 < delta < 1` and positive constants.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self, eps_max: f64) -> Result<()> {
        if !(self.epsilon < eps_max) {
            return Err(invalid(format!(
                "epsilon must lie in (0, {eps_max}), got {}",
                self.epsilon
            )));
        }
        self.validate_upto(eps_max)
    }

    /// Like [`Self::validate`] but admits `epsilon == eps_max`.
    pub fn validate_upto(&self, eps_max: f64) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= eps_max) {
            return Err(invalid(format!(
                "epsilon must lie in (0, {eps_max}], got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.c_t > 0.0 && self.c_t.is_finite() && self.c_m > 0.0 && self.c_m.is_finite()) {
            return Err(invalid("constants c_t and c_m must be positive and finite"));
        }
        Ok(())
    }
}

/// `ceil(c * x)` as a count, rejecting values that do not fit.
pub(crate) fn ceil_count(c: f64, x: f64) -> Result<usize> {
    let v = (c * x).ceil();
    if !v.is_finite() || v < 0.0 || v > u32::MAX as f64 {
        return Err(invalid(format!("derived count {v} out of range")));
    }
    Ok(v as usize)
}
