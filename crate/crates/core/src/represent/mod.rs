//! Feature spaces for ECG segments: raw time samples, Fourier magnitude
//! spectra, class-wise PCA reductions of those spectra, and the PSA / PSM
//! phase-space counts.

pub mod pca;
pub mod phase_space;
pub mod spectrum;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::RhythmLabel;
use crate::preprocess::TARGET_FS;

pub use pca::{fit_pca_basis, PcaBasis};
pub use phase_space::{psa_count, psa_threshold_classify, psm_count, PhaseSpaceResult, VfDecision};
pub use spectrum::magnitude_spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepresentationKind {
    Time,
    Spectrum,
    ReducedSpectrum { n_per_class: usize },
    PsaCount,
    PsmCount,
}

impl RepresentationKind {
    /// Feature dimension for a segment of `segment_len` samples. For the
    /// reduced spectrum this is the pooled size before orthonormalization.
    pub fn dim(&self, segment_len: usize, n_classes: usize) -> usize {
        match *self {
            RepresentationKind::Time => segment_len,
            RepresentationKind::Spectrum => segment_len / 2,
            RepresentationKind::ReducedSpectrum { n_per_class } => n_per_class * n_classes,
            RepresentationKind::PsaCount | RepresentationKind::PsmCount => 1,
        }
    }

    pub fn needs_basis(&self) -> bool {
        matches!(self, RepresentationKind::ReducedSpectrum { .. })
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepresentationKind::Time => f.write_str("time"),
            RepresentationKind::Spectrum => f.write_str("spectrum"),
            RepresentationKind::ReducedSpectrum { n_per_class } => write!(f, "pca{n_per_class}"),
            RepresentationKind::PsaCount => f.write_str("psa"),
            RepresentationKind::PsmCount => f.write_str("psm"),
        }
    }
}

impl FromStr for RepresentationKind {
    type Err = Error;

    /// Accepts `time`, `spectrum`, `psa`, `psm` and `pca<N>` (e.g. `pca5`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(RepresentationKind::Time),
            "spectrum" => Ok(RepresentationKind::Spectrum),
            "psa" => Ok(RepresentationKind::PsaCount),
            "psm" => Ok(RepresentationKind::PsmCount),
            other => other
                .strip_prefix("pca")
                .and_then(|n| n.parse().ok())
                .map(|n_per_class| RepresentationKind::ReducedSpectrum { n_per_class })
                .ok_or_else(|| Error::Config(format!("unknown representation {other:?}"))),
        }
    }
}

/// A feature vector tagged with the space it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub kind: RepresentationKind,
    pub values: Vec<f64>,
}

/// Maps a segment into a feature space. Holds the fitted PCA basis when the
/// space needs one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurizer {
    pub kind: RepresentationKind,
    pub segment_len: usize,
    pub basis: Option<PcaBasis>,
}

impl Featurizer {
    /// Fits whatever the representation needs from training segments only.
    pub fn fit(
        kind: RepresentationKind,
        segment_len: usize,
        training: &[(&[f64], RhythmLabel)],
        classes: &[RhythmLabel],
    ) -> Result<Self> {
        let basis = match kind {
            RepresentationKind::ReducedSpectrum { n_per_class } => {
                let spectra = training
                    .iter()
                    .map(|(s, l)| magnitude_spectrum(s).map(|v| (v, *l)))
                    .collect::<Result<Vec<_>>>()?;
                Some(fit_pca_basis(&spectra, classes, n_per_class)?)
            }
            _ => None,
        };
        Ok(Featurizer {
            kind,
            segment_len,
            basis,
        })
    }

    /// Featurizer for spaces that need no fitting.
    pub fn unfitted(kind: RepresentationKind, segment_len: usize) -> Result<Self> {
        if kind.needs_basis() {
            return Err(Error::InvalidArgument(format!(
                "representation {kind} needs a fitted basis"
            )));
        }
        Ok(Featurizer {
            kind,
            segment_len,
            basis: None,
        })
    }

    pub fn featurize(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.segment_len {
            return Err(Error::DimensionMismatch {
                expected: self.segment_len,
                actual: samples.len(),
            });
        }
        match self.kind {
            RepresentationKind::Time => Ok(samples.to_vec()),
            RepresentationKind::Spectrum => magnitude_spectrum(samples),
            RepresentationKind::ReducedSpectrum { .. } => {
                let basis = self.basis.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("reduced spectrum without a fitted basis".into())
                })?;
                basis.project(&magnitude_spectrum(samples)?)
            }
            RepresentationKind::PsaCount => {
                Ok(vec![psa_count(samples, TARGET_FS)?.visited as f64])
            }
            RepresentationKind::PsmCount => Ok(vec![psm_count(samples)?.visited as f64]),
        }
    }

    pub fn represent(&self, samples: &[f64]) -> Result<Representation> {
        Ok(Representation {
            kind: self.kind,
            values: self.featurize(samples)?,
        })
    }
}
