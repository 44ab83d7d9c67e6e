use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Raised-cosine regularization of the Dirac delta with half-width `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedDelta {
    epsilon: f64,
}

impl SmoothedDelta {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("valve half-thickness must be positive, got {epsilon}")));
        }
        Ok(SmoothedDelta { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        let e = self.epsilon;
        if y.abs() <= e {
            (1.0 + (PI * y / e).cos()) / (2.0 * e)
        } else {
            0.0
        }
    }
}

/// `δ_ε(y) = (1 + cos(πy/ε)) / (2ε)` on `|y| ≤ ε`, zero elsewhere.
pub fn smoothed_delta(y: f64, epsilon: f64) -> Result<f64> {
    Ok(SmoothedDelta::new(epsilon)?.eval(y))
}
