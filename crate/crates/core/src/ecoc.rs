//! Multiclass decisions from binary SVMs through a coding matrix.
//!
//! Classifier `n` sees only classes `m` with `w_mn ≠ 0`, labeled
//! `sgn(w_mn)`. A vector goes to the row minimizing `Σ_n χ(w_mn f_n(x))`.
//! Zero entries stay in the sum as `χ(0)`, and ties go to the lowest row.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::RhythmLabel;
use crate::represent::Featurizer;
use crate::svm::{smo_train, BinarySvmModel, SvmParams};
use crate::task::Task;

pub const ECOC_FORMAT_VERSION: u32 = 1;

/// Entries in {−1, 0, +1}; one row per class, one column per classifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingMatrix {
    rows: Vec<Vec<i8>>,
}

impl CodingMatrix {
    /// The 3 × 6 code over (SR, VT, VF): three one-vs-all columns and the
    /// three pairwise columns.
    pub fn standard() -> Self {
        CodingMatrix {
            rows: vec![
                vec![1, 1, -1, 1, 1, 0],
                vec![1, -1, 1, 0, -1, 1],
                vec![-1, 1, 1, -1, 0, -1],
            ],
        }
    }

    /// Checks only shape and entry values; see [`CodingMatrix::validate`].
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.len() < 2 || width == 0 {
            return Err(Error::InvalidArgument(
                "coding matrix needs at least 2 rows and 1 column".into(),
            ));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidArgument("coding matrix rows differ in length".into()));
        }
        if rows.iter().flatten().any(|&w| !(-1..=1).contains(&w)) {
            return Err(Error::InvalidArgument("coding matrix entries must be -1, 0 or 1".into()));
        }
        Ok(CodingMatrix { rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.rows[row][col]
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    pub fn column(&self, col: usize) -> Vec<i8> {
        self.rows.iter().map(|r| r[col]).collect()
    }

    /// Distinct rows, and every column has at least one +1 and one −1.
    pub fn validate(&self) -> Result<()> {
        for a in 0..self.n_rows() {
            for b in a + 1..self.n_rows() {
                if self.rows[a] == self.rows[b] {
                    return Err(Error::InvalidArgument(format!(
                        "coding matrix rows {a} and {b} are identical"
                    )));
                }
            }
        }
        for n in 0..self.n_columns() {
            let col = self.column(n);
            if col.iter().all(|&w| w == 0) {
                return Err(Error::InvalidArgument(format!("coding matrix column {n} is all zero")));
            }
            if !(col.contains(&1) && col.contains(&-1)) {
                return Err(Error::InvalidArgument(format!(
                    "coding matrix column {n} lacks a +1 or a -1"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossFn {
    /// `max(1 − z, 0)`
    #[default]
    Hinge,
    /// `(1 − sgn z) / 2`, with `sgn 0 = 0`
    Hamming,
    /// `e^{−z}`
    Exponential,
    /// `−z`
    Linear,
}

impl LossFn {
    pub const ALL: [LossFn; 4] = [LossFn::Hinge, LossFn::Hamming, LossFn::Exponential, LossFn::Linear];

    pub fn eval(self, z: f64) -> f64 {
        match self {
            LossFn::Hinge => (1.0 - z).max(0.0),
            LossFn::Hamming => {
                let sgn = if z > 0.0 {
                    1.0
                } else if z < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                (1.0 - sgn) / 2.0
            }
            LossFn::Exponential => (-z).exp(),
            LossFn::Linear => -z,
        }
    }
}

impl fmt::Display for LossFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossFn::Hinge => "hinge",
            LossFn::Hamming => "hamming",
            LossFn::Exponential => "exponential",
            LossFn::Linear => "linear",
        })
    }
}

impl FromStr for LossFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hinge" => Ok(LossFn::Hinge),
            "hamming" => Ok(LossFn::Hamming),
            "exponential" => Ok(LossFn::Exponential),
            "linear" => Ok(LossFn::Linear),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

pub fn loss_eval(loss: LossFn, z: f64) -> f64 {
    loss.eval(z)
}

/// Total loss of every row for the given decision values.
pub fn row_losses(values: &[f64], matrix: &CodingMatrix, loss: LossFn) -> Result<Vec<f64>> {
    if values.len() != matrix.n_columns() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n_columns(),
            actual: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("decision values"));
    }
    Ok(matrix
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .zip(values)
                .map(|(&w, &f)| loss.eval(f64::from(w) * f))
                .sum()
        })
        .collect())
}

/// Row of minimal total loss; ties go to the lowest row index.
pub fn decode_row(values: &[f64], matrix: &CodingMatrix, loss: LossFn) -> Result<usize> {
    let losses = row_losses(values, matrix, loss)?;
    let mut best = 0;
    for (m, &l) in losses.iter().enumerate().skip(1) {
        if l < losses[best] {
            best = m;
        }
    }
    Ok(best)
}

/// [`decode_row`] for a matrix whose rows are SR, VT, VF.
pub fn decode(values: &[f64], matrix: &CodingMatrix, loss: LossFn) -> Result<RhythmLabel> {
    if matrix.n_rows() != 3 {
        return Err(Error::InvalidArgument(format!(
            "label decoding needs 3 rows, matrix has {}",
            matrix.n_rows()
        )));
    }
    decode_row(values, matrix, loss).map(|r| RhythmLabel::ALL[r])
}

/// Minimum generalized Hamming distance `Σ (1 − u_s v_s)/2` over row pairs:
/// a disagreement counts 1 and a position with a zero counts ½.
pub fn min_row_hamming(matrix: &CodingMatrix) -> f64 {
    let rows = matrix.rows();
    let mut best = f64::INFINITY;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            let d: f64 = rows[a]
                .iter()
                .zip(&rows[b])
                .map(|(&u, &v)| (1.0 - f64::from(u) * f64::from(v)) / 2.0)
                .sum();
            best = best.min(d);
        }
    }
    best
}

/// Indices and ±1 labels of the examples column `col` trains on.
pub fn column_subset(groups: &[usize], matrix: &CodingMatrix, col: usize) -> (Vec<usize>, Vec<i8>) {
    groups
        .iter()
        .enumerate()
        .filter_map(|(i, &g)| {
            let w = matrix.get(g, col);
            (w != 0).then_some((i, w))
        })
        .unzip()
}

/// Binary classifiers, their coding matrix, decoding loss and the feature
/// map they were trained in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcocModel {
    pub format_version: u32,
    pub task: Task,
    pub matrix: CodingMatrix,
    pub loss: LossFn,
    pub featurizer: Featurizer,
    pub classifiers: Vec<BinarySvmModel>,
}

/// Trains one SVM per column. `training` holds feature vectors and their
/// row (class) indices; `params` holds one entry per column.
pub fn train_ecoc(
    training: &[(&[f64], usize)],
    task: Task,
    matrix: &CodingMatrix,
    params: &[SvmParams],
    loss: LossFn,
    featurizer: Featurizer,
) -> Result<EcocModel> {
    matrix.validate()?;
    if params.len() != matrix.n_columns() {
        return Err(Error::InvalidArgument(format!(
            "{} parameter sets for {} columns",
            params.len(),
            matrix.n_columns()
        )));
    }
    if let Some(&(_, g)) = training.iter().find(|(_, g)| *g >= matrix.n_rows()) {
        return Err(Error::InvalidArgument(format!("class index {g} outside the coding matrix")));
    }
    let groups: Vec<usize> = training.iter().map(|(_, g)| *g).collect();
    let classifiers = (0..matrix.n_columns())
        .into_par_iter()
        .map(|col| {
            let (idx, labels) = column_subset(&groups, matrix, col);
            if idx.is_empty() {
                return Err(Error::InsufficientData(format!("column {col} has no training data")));
            }
            let data: Vec<&[f64]> = idx.iter().map(|&i| training[i].0).collect();
            smo_train(&data, &labels, &params[col])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EcocModel {
        format_version: ECOC_FORMAT_VERSION,
        task,
        matrix: matrix.clone(),
        loss,
        featurizer,
        classifiers,
    })
}

impl EcocModel {
    /// One decision value per column for a feature vector.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.classifiers.iter().map(|m| m.decision_value(x)).collect()
    }

    /// Decision values of a raw segment, featurized first.
    pub fn segment_decision_values(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.decision_values(&self.featurizer.featurize(samples)?)
    }

    /// Predicted row (class group of the task) for a feature vector.
    pub fn predict_row(&self, x: &[f64]) -> Result<usize> {
        decode_row(&self.decision_values(x)?, &self.matrix, self.loss)
    }

    /// Predicted label for a feature vector; three-way models only.
    pub fn classify(&self, x: &[f64]) -> Result<RhythmLabel> {
        self.require_three_way()?;
        self.predict_row(x).map(|r| RhythmLabel::ALL[r])
    }

    pub fn classify_segment(&self, samples: &[f64]) -> Result<RhythmLabel> {
        self.require_three_way()?;
        decode(&self.segment_decision_values(samples)?, &self.matrix, self.loss)
    }

    fn require_three_way(&self) -> Result<()> {
        if self.task != Task::ThreeWay {
            return Err(Error::InvalidArgument(format!(
                "{} model predicts class groups; use predict_row",
                self.task
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: EcocModel = serde_json::from_str(text)?;
        if model.format_version != ECOC_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: model.format_version,
                expected: ECOC_FORMAT_VERSION,
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
