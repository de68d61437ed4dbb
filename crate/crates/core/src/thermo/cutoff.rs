use serde::{Deserialize, Serialize};

use super::{Result, ThermoError};

/// Entropy cut-off `Z_{a,b}(s) = clamp(s, a, b)` with `a` possibly `-inf`
/// and `b` possibly `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutOff {
    lower: f64,
    upper: f64,
}

impl CutOff {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return Err(ThermoError::InvalidParameter(format!(
                "cut-off needs a < b, got ({lower}, {upper})"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `Z_{-inf, +inf}`.
    pub fn identity() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_identity(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }

    #[inline]
    pub fn apply(&self, s: f64) -> f64 {
        s.clamp(self.lower, self.upper)
    }
}
