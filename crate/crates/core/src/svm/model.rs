use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained binary SVM: `f(x) = Σ coef_i K(x, sv_i) + bias`, where
/// `coef_i = a_i y_i` and only vectors with `a_i > 0` are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub format_version: u32,
    pub kernel: KernelSpec,
    /// Cost parameter used in training.
    pub c: f64,
    pub dim: usize,
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl BinarySvmModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, coef)| coef * self.kernel.eval_unchecked(x, sv))
            .sum::<f64>()
            + self.bias)
    }

    /// `sign(f(x))` with `sign(0) = +1`.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(sign(self.decision_value(x)?))
    }

    /// The `a_i` of the stored support vectors.
    pub fn alphas(&self) -> impl Iterator<Item = f64> + '_ {
        self.coefficients.iter().map(|c| c.abs())
    }

    pub fn n_support(&self) -> usize {
        self.support_vectors.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: BinarySvmModel = serde_json::from_str(text)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: model.format_version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Sign with the tie rule `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(bias: f64) -> BinarySvmModel {
        BinarySvmModel {
            format_version: MODEL_FORMAT_VERSION,
            kernel: KernelSpec::Linear,
            c: 1.0,
            dim: 2,
            support_vectors: vec![],
            coefficients: vec![],
            bias,
        }
    }

    #[test]
    fn empty_support_gives_bias() {
        assert_eq!(empty(0.25).decision_value(&[3.0, 4.0]).unwrap(), 0.25);
    }

    #[test]
    fn sign_rule() {
        assert_eq!(sign(0.3), 1);
        assert_eq!(sign(-0.3), -1);
        assert_eq!(sign(0.0), 1);
        assert_eq!(empty(0.0).predict(&[1.0, 1.0]).unwrap(), 1);
        assert_eq!(empty(-0.3).predict(&[1.0, 1.0]).unwrap(), -1);
    }

    #[test]
    fn dimension_checked() {
        assert!(matches!(
            empty(0.0).decision_value(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, actual: 1 })
        ));
    }
}
