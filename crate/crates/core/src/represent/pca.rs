//! Supervised dimension reduction of magnitude spectra.
//!
//! PCA runs separately on each class. The top `n_per_class` components of
//! every class are pooled in class order and orthonormalized by
//! Gram-Schmidt with column pivoting; directions whose residual norm falls
//! below [`RESIDUAL_CUTOFF`] are dropped. Projection centers on the global
//! mean, which is the mean of the class means.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::RhythmLabel;

pub const MIN_COMPONENTS: usize = 5;
pub const MAX_COMPONENTS: usize = 15;
pub const RESIDUAL_CUTOFF: f64 = 1e-8;
pub const BASIS_FORMAT_VERSION: u32 = 1;

/// PCA of one class's training spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPca {
    pub label: RhythmLabel,
    pub mean: Vec<f64>,
    /// All covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Top `n_per_class` unit eigenvectors, same order as `eigenvalues`.
    pub components: Vec<Vec<f64>>,
}

impl ClassPca {
    /// Fraction of this class's variance captured by its top `k` components.
    pub fn captured_variance(&self, k: usize) -> f64 {
        let total: f64 = self.eigenvalues.iter().map(|v| v.max(0.0)).sum();
        if total == 0.0 {
            return 1.0;
        }
        self.eigenvalues.iter().take(k).map(|v| v.max(0.0)).sum::<f64>() / total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaBasis {
    pub format_version: u32,
    pub dim: usize,
    pub n_per_class: usize,
    pub classes: Vec<ClassPca>,
    pub global_mean: Vec<f64>,
    /// Orthonormal rows spanning the pooled components.
    pub basis: Vec<Vec<f64>>,
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
/// Each eigenvector's largest-magnitude entry is made positive.
pub fn symmetric_eigen(matrix: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    (values, vectors)
}

fn mean_of(rows: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows.len() as f64);
    mean
}

/// Sample covariance (n - 1 denominator).
fn covariance(rows: &[&[f64]], mean: &[f64]) -> DMatrix<f64> {
    let dim = mean.len();
    let centered = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j] - mean[j]);
    centered.transpose() * &centered / (rows.len() as f64 - 1.0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gram-Schmidt with column pivoting: repeatedly takes the candidate with
/// the largest residual, normalizes it, and removes it from the rest
/// (twice, for stability). Stops when every residual is below `cutoff`.
pub fn orthonormalize_pivoted(candidates: &[Vec<f64>], cutoff: f64) -> Vec<Vec<f64>> {
    let mut residual: Vec<Vec<f64>> = candidates.to_vec();
    let mut remaining: Vec<usize> = (0..residual.len()).collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    while !remaining.is_empty() {
        let (pos, best) = remaining
            .iter()
            .enumerate()
            .map(|(p, &i)| (p, norm(&residual[i])))
            .fold((0, -1.0), |acc, (p, n)| if n > acc.1 { (p, n) } else { acc });
        if best < cutoff {
            break;
        }
        let idx = remaining.remove(pos);
        let q: Vec<f64> = residual[idx].iter().map(|v| v / best).collect();
        for &i in &remaining {
            for _ in 0..2 {
                let c = dot(&residual[i], &q);
                residual[i].iter_mut().zip(&q).for_each(|(r, qv)| *r -= c * qv);
            }
        }
        out.push(q);
    }
    out
}

/// Fits per-class PCA on training spectra and builds the pooled basis.
pub fn fit_pca_basis(
    training: &[(Vec<f64>, RhythmLabel)],
    classes: &[RhythmLabel],
    n_per_class: usize,
) -> Result<PcaBasis> {
    if !(MIN_COMPONENTS..=MAX_COMPONENTS).contains(&n_per_class) {
        return Err(Error::InvalidArgument(format!(
            "n_per_class {n_per_class} outside [{MIN_COMPONENTS}, {MAX_COMPONENTS}]"
        )));
    }
    if classes.is_empty() {
        return Err(Error::InvalidArgument("no classes given for PCA".into()));
    }
    let dim = training
        .first()
        .map(|(v, _)| v.len())
        .ok_or_else(|| Error::InsufficientData("empty PCA training set".into()))?;
    if let Some((v, _)) = training.iter().find(|(v, _)| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: v.len(),
        });
    }
    if n_per_class > dim {
        return Err(Error::InvalidArgument(format!(
            "n_per_class {n_per_class} exceeds spectrum dimension {dim}"
        )));
    }

    let mut per_class = Vec::with_capacity(classes.len());
    for &label in classes {
        let rows: Vec<&[f64]> = training
            .iter()
            .filter(|(_, l)| *l == label)
            .map(|(v, _)| v.as_slice())
            .collect();
        if rows.len() < n_per_class + 1 {
            return Err(Error::InsufficientData(format!(
                "class {label} has {} spectra, PCA with {n_per_class} components needs {}",
                rows.len(),
                n_per_class + 1
            )));
        }
        let mean = mean_of(&rows, dim);
        let (eigenvalues, mut vectors) = symmetric_eigen(covariance(&rows, &mean));
        vectors.truncate(n_per_class);
        per_class.push(ClassPca {
            label,
            mean,
            eigenvalues,
            components: vectors,
        });
    }

    let mut global_mean = vec![0.0; dim];
    for c in &per_class {
        global_mean.iter_mut().zip(&c.mean).for_each(|(g, m)| *g += m);
    }
    global_mean.iter_mut().for_each(|g| *g /= per_class.len() as f64);

    let pooled: Vec<Vec<f64>> = per_class
        .iter()
        .flat_map(|c| c.components.iter().cloned())
        .collect();
    let basis = orthonormalize_pivoted(&pooled, RESIDUAL_CUTOFF);

    Ok(PcaBasis {
        format_version: BASIS_FORMAT_VERSION,
        dim,
        n_per_class,
        classes: per_class,
        global_mean,
        basis,
    })
}

impl PcaBasis {
    /// Number of retained basis vectors (the projected dimension).
    pub fn output_dim(&self) -> usize {
        self.basis.len()
    }

    /// Number of pooled components before orthonormalization.
    pub fn pooled_len(&self) -> usize {
        self.classes.iter().map(|c| c.components.len()).sum()
    }

    /// Coordinates of `spectrum - global_mean` in the basis.
    pub fn project(&self, spectrum: &[f64]) -> Result<Vec<f64>> {
        if spectrum.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: spectrum.len(),
            });
        }
        let centered: Vec<f64> = spectrum
            .iter()
            .zip(&self.global_mean)
            .map(|(s, m)| s - m)
            .collect();
        Ok(self.basis.iter().map(|b| dot(b, &centered)).collect())
    }

    /// Maps coordinates back to the spectrum space.
    pub fn reconstruct(&self, coords: &[f64]) -> Result<Vec<f64>> {
        if coords.len() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                actual: coords.len(),
            });
        }
        let mut out = self.global_mean.clone();
        for (c, b) in coords.iter().zip(&self.basis) {
            out.iter_mut().zip(b).for_each(|(o, bv)| *o += c * bv);
        }
        Ok(out)
    }

    pub fn class(&self, label: RhythmLabel) -> Option<&ClassPca> {
        self.classes.iter().find(|c| c.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let basis: PcaBasis = serde_json::from_str(text)?;
        if basis.format_version != BASIS_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                found: basis.format_version,
                expected: BASIS_FORMAT_VERSION,
            });
        }
        Ok(basis)
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
