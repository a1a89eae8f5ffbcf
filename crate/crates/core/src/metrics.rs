//! Accuracy, per-class sensitivity and mean ± standard error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::RhythmLabel;

/// Counts indexed `[true][predicted]` in SR, VT, VF order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (RhythmLabel, RhythmLabel)>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (t, p) in pairs {
            cm.add(t, p);
        }
        cm
    }

    pub fn add(&mut self, truth: RhythmLabel, predicted: RhythmLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, class: RhythmLabel) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for i in 0..3 {
            for j in 0..3 {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InsufficientData("accuracy of an empty confusion matrix".into()));
    }
    Ok(cm.trace() as f64 / total as f64)
}

pub fn sensitivity(cm: &ConfusionMatrix, class: RhythmLabel) -> Result<f64> {
    let row = cm.row_total(class);
    if row == 0 {
        return Err(Error::InsufficientData(format!("no test examples of class {class}")));
    }
    Ok(cm.counts[class.index()][class.index()] as f64 / row as f64)
}

/// Arithmetic mean and standard error `s / √n`, with `s` the sample
/// standard deviation (n − 1 denominator).
pub fn mean_stderr(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "standard error needs at least 2 values, got {n}"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((mean, var.sqrt() / (n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use RhythmLabel::*;

    #[test]
    fn accuracy_examples() {
        let diag = ConfusionMatrix { counts: [[10, 0, 0], [0, 10, 0], [0, 0, 10]] };
        assert_eq!(accuracy(&diag).unwrap(), 1.0);
        let ones = ConfusionMatrix { counts: [[1; 3]; 3] };
        assert!((accuracy(&ones).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let cm = ConfusionMatrix { counts: [[9, 1, 0], [0, 9, 1], [1, 0, 9]] };
        assert!((accuracy(&cm).unwrap() - 0.9).abs() < 1e-15);
        assert!(accuracy(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn sensitivity_examples() {
        let cm = ConfusionMatrix { counts: [[8, 1, 1], [0, 5, 0], [0, 0, 0]] };
        assert!((sensitivity(&cm, SR).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(sensitivity(&cm, VT).unwrap(), 1.0);
        assert!(sensitivity(&cm, VF).is_err());
        let cm = ConfusionMatrix { counts: [[0, 5, 5], [0; 3], [0; 3]] };
        assert_eq!(sensitivity(&cm, SR).unwrap(), 0.0);
    }

    #[test]
    fn mean_stderr_examples() {
        let (m, s) = mean_stderr(&[0.9; 5]).unwrap();
        assert!((m - 0.9).abs() < 1e-15 && s.abs() < 1e-15);
        let (m, s) = mean_stderr(&[0.0, 1.0]).unwrap();
        assert_eq!((m, s), (0.5, 0.5));
        let (m, s) = mean_stderr(&[0.8, 0.9, 1.0]).unwrap();
        // s = 0.1, s/√3 = 0.057735...
        assert!((m - 0.9).abs() < 1e-12);
        assert!((s - 0.1 / 3f64.sqrt()).abs() < 1e-12);
        assert!((s - 0.0577).abs() < 1e-4);
        assert!(mean_stderr(&[1.0]).is_err());
    }

    #[test]
    fn from_pairs_counts() {
        let cm = ConfusionMatrix::from_pairs([(SR, SR), (SR, VF), (VT, VT)]);
        assert_eq!(cm.total(), 3);
        assert_eq!(cm.counts[0][2], 1);
    }
}
