use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `<x, y>`
    Linear,
    /// `(1 + c<x, y>)^d`
    Polynomial { c: f64, degree: u32 },
    /// `exp(-gamma ||x - y||^2)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { c, degree } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidArgument(format!("polynomial c must be positive, got {c}")));
                }
                if degree == 0 {
                    return Err(Error::InvalidArgument("polynomial degree must be at least 1".into()));
                }
                Ok(())
            }
            KernelSpec::Rbf { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::InvalidArgument(format!("RBF gamma must be positive, got {gamma}")));
                }
                Ok(())
            }
        }
    }

    /// Kernel value without a dimension check.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { c, degree } => (1.0 + c * dot(x, y)).powi(degree as i32),
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                actual: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Polynomial { c, degree } => write!(f, "poly(c={c:e},d={degree})"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf(gamma={gamma:e})"),
        }
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
