//! Experiment configuration: a TOML file, overridable field by field.
//!
//! ```toml
//! data_dir = "records"
//! output_dir = "out"
//! window_s = 2.0
//! representation = "spectrum"   # time | spectrum | pca<N>
//! kernel = "rbf"                # linear | polynomial | rbf
//! task = "three-way"            # three-way | nonvf-vs-vf | vt-vs-vf
//! loss = "hinge"
//! seed = 0
//!
//! [ensemble]
//! window_s = [3.0, 4.0, 5.0, 6.0]
//! segment_s = [1.0, 2.0]
//! shift_s = [0.25, 0.5]
//! aggregation = "mean"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ecoc::LossFn;
use crate::ensemble::{Aggregation, EnsembleConfig, SEGMENT_SWEEP_S, SHIFT_SWEEP_S, WINDOW_SWEEP_S};
use crate::error::{Error, Result};
use crate::preprocess::{TARGET_FS, WINDOW_LENGTHS_S};
use crate::represent::pca::{MAX_COMPONENTS, MIN_COMPONENTS};
use crate::represent::RepresentationKind;
use crate::task::Task;
use crate::tune::KernelFamily;

/// Config file contents; every field optional so files and flags can be
/// layered.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub data_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub window_s: Option<f64>,
    pub representation: Option<String>,
    pub kernel: Option<String>,
    pub task: Option<String>,
    pub loss: Option<String>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub ensemble: Option<RawEnsemble>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEnsemble {
    pub window_s: Option<Vec<f64>>,
    pub segment_s: Option<Vec<f64>>,
    pub shift_s: Option<Vec<f64>>,
    pub aggregation: Option<String>,
}

macro_rules! take {
    ($base:expr, $over:expr, $($field:ident),*) => {
        $( if $over.$field.is_some() { $base.$field = $over.$field; } )*
    };
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(mut self, over: RawConfig) -> Self {
        take!(self, over, data_dir, output_dir, window_s, representation, kernel, task, loss, seed, tol);
        match (&mut self.ensemble, over.ensemble) {
            (Some(base), Some(o)) => {
                take!(base, o, window_s, segment_s, shift_s, aggregation);
            }
            (None, Some(o)) => self.ensemble = Some(o),
            _ => {}
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleOptions {
    pub window_s: Vec<f64>,
    pub segment_s: Vec<f64>,
    pub shift_s: Vec<f64>,
    pub aggregation: Aggregation,
}

impl EnsembleOptions {
    /// Every (window, segment, shift) combination, window-major.
    pub fn configs(&self) -> Vec<EnsembleConfig> {
        let mut out = Vec::new();
        for &window_s in &self.window_s {
            for &segment_s in &self.segment_s {
                for &shift_s in &self.shift_s {
                    out.push(EnsembleConfig {
                        window_s,
                        segment_s,
                        shift_s,
                        aggregation: self.aggregation,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub window_s: f64,
    #[serde(serialize_with = "display")]
    pub representation: RepresentationKind,
    pub kernel: KernelFamily,
    pub task: Task,
    pub loss: LossFn,
    pub seed: u64,
    pub tol: f64,
    pub ensemble: EnsembleOptions,
}

fn display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn parse<T: std::str::FromStr<Err = Error>>(v: Option<String>, default: T) -> Result<T> {
    v.map(|s| s.parse()).transpose().map(|o| o.unwrap_or(default))
}

impl ExperimentConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let ens = raw.ensemble.unwrap_or_default();
        let cfg = ExperimentConfig {
            data_dir: raw
                .data_dir
                .ok_or_else(|| Error::Config("data_dir is required".into()))?,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            window_s: raw.window_s.unwrap_or(2.0),
            representation: parse(raw.representation, RepresentationKind::Spectrum)?,
            kernel: parse(raw.kernel, KernelFamily::Rbf)?,
            task: parse(raw.task, Task::ThreeWay)?,
            loss: parse(raw.loss, LossFn::Hinge)?,
            seed: raw.seed.unwrap_or(0),
            tol: raw.tol.unwrap_or(1e-3),
            ensemble: EnsembleOptions {
                window_s: ens.window_s.unwrap_or_else(|| WINDOW_SWEEP_S.to_vec()),
                segment_s: ens.segment_s.unwrap_or_else(|| SEGMENT_SWEEP_S.to_vec()),
                shift_s: ens.shift_s.unwrap_or_else(|| SHIFT_SWEEP_S.to_vec()),
                aggregation: parse(ens.aggregation, Aggregation::Mean)?,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !WINDOW_LENGTHS_S.contains(&self.window_s) {
            return Err(Error::Config(format!(
                "window_s {} not in {WINDOW_LENGTHS_S:?}",
                self.window_s
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        self.check_representation(self.window_s)?;
        let e = &self.ensemble;
        if e.window_s.is_empty() || e.segment_s.is_empty() || e.shift_s.is_empty() {
            return Err(Error::Config("ensemble sweep lists must not be empty".into()));
        }
        for c in e.configs() {
            c.validate()?;
            self.check_representation(c.segment_s)?;
        }
        Ok(())
    }

    fn check_representation(&self, segment_s: f64) -> Result<()> {
        match self.representation {
            RepresentationKind::PsaCount | RepresentationKind::PsmCount => Err(Error::Config(
                "psa and psm are threshold detectors; use the psa command".into(),
            )),
            RepresentationKind::ReducedSpectrum { n_per_class } => {
                if !(MIN_COMPONENTS..=MAX_COMPONENTS).contains(&n_per_class) {
                    return Err(Error::Config(format!(
                        "pca components per class must be in {MIN_COMPONENTS}..={MAX_COMPONENTS}, got {n_per_class}"
                    )));
                }
                let bins = (segment_s * f64::from(TARGET_FS)).round() as usize / 2;
                let pooled = n_per_class * self.task.groups().len();
                if pooled > bins {
                    return Err(Error::Config(format!(
                        "{} x {} classes = {pooled} components exceed the {bins} spectrum bins of a {segment_s} s segment",
                        self.representation,
                        self.task.groups().len()
                    )));
                }
                Ok(())
            }
            RepresentationKind::Time | RepresentationKind::Spectrum => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RawConfig {
        RawConfig {
            data_dir: Some("d".into()),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_and_parse() {
        let raw = RawConfig::from_toml(
            "data_dir = \"recs\"\nwindow_s = 1.0\nrepresentation = \"pca5\"\ntask = \"vt-vs-vf\"\n[ensemble]\nshift_s = [0.5]\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_raw(raw).unwrap();
        assert_eq!(cfg.representation, RepresentationKind::ReducedSpectrum { n_per_class: 5 });
        assert_eq!(cfg.task, Task::VtVsVf);
        assert_eq!(cfg.kernel, KernelFamily::Rbf);
        assert_eq!(cfg.ensemble.configs().len(), 8);
    }

    #[test]
    fn overrides_win() {
        let file = RawConfig {
            window_s: Some(4.0),
            kernel: Some("linear".into()),
            ..base()
        };
        let over = RawConfig {
            window_s: Some(1.0),
            ..Default::default()
        };
        let cfg = ExperimentConfig::from_raw(file.merge(over)).unwrap();
        assert_eq!(cfg.window_s, 1.0);
        assert_eq!(cfg.kernel, KernelFamily::Linear);
    }

    #[test]
    fn rejected_configs() {
        let bad = |r: RawConfig| ExperimentConfig::from_raw(r).is_err();
        assert!(bad(RawConfig { window_s: Some(7.0), ..base() }));
        assert!(bad(RawConfig::default()));
        assert!(bad(RawConfig { representation: Some("psa".into()), ..base() }));
        assert!(bad(RawConfig { representation: Some("pca20".into()), ..base() }));
        assert!(bad(RawConfig { representation: Some("pca15".into()), window_s: Some(0.5), ..base() }));
        assert!(bad(RawConfig { kernel: Some("sigmoid".into()), ..base() }));
        let ens = RawEnsemble {
            window_s: Some(vec![2.0]),
            segment_s: Some(vec![2.0]),
            ..Default::default()
        };
        assert!(bad(RawConfig { ensemble: Some(ens), ..base() }));
        assert!(RawConfig::from_toml("wndow_s = 2.0").is_err());
    }
}
