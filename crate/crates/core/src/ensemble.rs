//! Window classification by aggregating decision values over shifted
//! sub-segments.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecoc::{decode, decode_row, EcocModel};
use crate::error::{Error, Result};
use crate::label::RhythmLabel;
use crate::metrics::ConfusionMatrix;
use crate::preprocess::{LabeledSegment, TARGET_FS};
use crate::svm::sign;
use crate::task::Task;
use crate::tune::{
    grid_search_points, grid_points, train_task_model, Access, FoldReport, GridPoint, KernelFamily, ModelSpec,
    PartitionPlan, SearchResult, SegmentSource,
};

pub const WINDOW_SWEEP_S: [f64; 4] = [3.0, 4.0, 5.0, 6.0];
pub const SEGMENT_SWEEP_S: [f64; 2] = [1.0, 2.0];
pub const SHIFT_SWEEP_S: [f64; 2] = [0.25, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
    Majority,
    Max,
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Median => "median",
            Aggregation::Majority => "majority",
            Aggregation::Max => "max",
        })
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "median" => Ok(Aggregation::Median),
            "majority" => Ok(Aggregation::Majority),
            "max" => Ok(Aggregation::Max),
            other => Err(Error::Config(format!("unknown aggregation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub window_s: f64,
    pub segment_s: f64,
    pub shift_s: f64,
    #[serde(default)]
    pub aggregation: Aggregation,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            window_s: 5.0,
            segment_s: 1.0,
            shift_s: 0.5,
            aggregation: Aggregation::Mean,
        }
    }
}

fn to_samples(name: &str, seconds: f64) -> Result<usize> {
    let n = seconds * f64::from(TARGET_FS);
    if !(n.is_finite() && n >= 1.0) || (n - n.round()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "{name} length {seconds} s is not a positive whole number of samples"
        )));
    }
    Ok(n.round() as usize)
}

impl EnsembleConfig {
    /// Window, segment and shift lengths in samples.
    pub fn lengths(&self) -> Result<(usize, usize, usize)> {
        let w = to_samples("window", self.window_s)?;
        let s = to_samples("segment", self.segment_s)?;
        let h = to_samples("shift", self.shift_s)?;
        if s >= w {
            return Err(Error::Config(format!(
                "segment {} s must be shorter than window {} s",
                self.segment_s, self.window_s
            )));
        }
        if h == 0 || (w - s) % h != 0 {
            return Err(Error::Config(format!(
                "window {} s minus segment {} s is not a multiple of shift {} s",
                self.window_s, self.segment_s, self.shift_s
            )));
        }
        Ok((w, s, h))
    }

    pub fn validate(&self) -> Result<()> {
        self.lengths().map(|_| ())
    }

    /// `(window − segment) / shift + 1`
    pub fn segment_count(&self) -> Result<usize> {
        let (w, s, h) = self.lengths()?;
        Ok((w - s) / h + 1)
    }

    /// Every combination of the window, segment and shift sweeps that
    /// satisfies the invariants.
    pub fn sweep(aggregation: Aggregation) -> Vec<EnsembleConfig> {
        let mut out = Vec::new();
        for window_s in WINDOW_SWEEP_S {
            for segment_s in SEGMENT_SWEEP_S {
                for shift_s in SHIFT_SWEEP_S {
                    let cfg = EnsembleConfig {
                        window_s,
                        segment_s,
                        shift_s,
                        aggregation,
                    };
                    if cfg.validate().is_ok() {
                        out.push(cfg);
                    }
                }
            }
        }
        out
    }
}

/// Sub-segments at offsets 0, shift, 2·shift, …
pub fn slice_window<'a>(window: &'a [f64], cfg: &EnsembleConfig) -> Result<Vec<&'a [f64]>> {
    let (w, s, h) = cfg.lengths()?;
    if window.len() != w {
        return Err(Error::DimensionMismatch {
            expected: w,
            actual: window.len(),
        });
    }
    Ok((0..=(w - s) / h).map(|k| &window[k * h..k * h + s]).collect())
}

/// Consecutive non-overlapping pieces of `len` samples; a short tail is
/// dropped.
pub fn split_non_overlapping(window: &[f64], len: usize) -> Vec<&[f64]> {
    window.chunks_exact(len).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Reduces each column of the per-segment decision values.
pub fn aggregate(values: &[Vec<f64>], method: Aggregation) -> Result<Vec<f64>> {
    let first = values
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to aggregate".into()))?;
    let width = first.len();
    if let Some(bad) = values.iter().find(|v| v.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: bad.len(),
        });
    }
    let n = values.len() as f64;
    Ok((0..width)
        .map(|c| {
            let col = values.iter().map(|v| v[c]);
            match method {
                Aggregation::Mean => col.sum::<f64>() / n,
                Aggregation::Median => median(col.collect()),
                Aggregation::Majority => {
                    let mean = col.map(|v| f64::from(sign(v))).sum::<f64>() / n;
                    f64::from(sign(mean))
                }
                Aggregation::Max => col.fold(0.0, |best: f64, v| {
                    if v.abs() > best.abs() || (v.abs() == best.abs() && v > best) {
                        v
                    } else {
                        best
                    }
                }),
            }
        })
        .collect())
}

/// Aggregated decision values over a window's sub-segments.
pub fn ensemble_decision_values(model: &EcocModel, window: &[f64], cfg: &EnsembleConfig) -> Result<Vec<f64>> {
    let segments = slice_window(window, cfg)?;
    if segments[0].len() != model.featurizer.segment_len {
        return Err(Error::InvalidArgument(format!(
            "model expects {}-sample segments, ensemble uses {}",
            model.featurizer.segment_len,
            segments[0].len()
        )));
    }
    let values = segments
        .par_iter()
        .map(|s| model.segment_decision_values(s))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&values, cfg.aggregation)
}

pub fn ensemble_predict_row(model: &EcocModel, window: &[f64], cfg: &EnsembleConfig) -> Result<usize> {
    decode_row(&ensemble_decision_values(model, window, cfg)?, &model.matrix, model.loss)
}

/// Window label for a three-way model.
pub fn ensemble_classify(model: &EcocModel, window: &[f64], cfg: &EnsembleConfig) -> Result<RhythmLabel> {
    if model.task != Task::ThreeWay {
        return Err(Error::InvalidArgument(format!(
            "{} model predicts class groups; use ensemble_predict_row",
            model.task
        )));
    }
    decode(&ensemble_decision_values(model, window, cfg)?, &model.matrix, model.loss)
}

/// Non-overlapping sub-segments of a set of windows, each remembering the
/// window it came from.
#[derive(Debug, Clone)]
pub struct SubSegments {
    pub segments: Vec<LabeledSegment>,
    pub parent: Vec<usize>,
}

impl SubSegments {
    pub fn split(source: &dyn SegmentSource, windows: &[usize], access: Access, segment_len: usize) -> Self {
        let mut segments = Vec::new();
        let mut parent = Vec::new();
        for &w in windows {
            for (k, piece) in split_non_overlapping(source.samples(w, access), segment_len).into_iter().enumerate() {
                segments.push(LabeledSegment {
                    samples: piece.to_vec(),
                    label: source.label(w),
                    record_id: format!("window{w}"),
                    start: k * segment_len,
                });
                parent.push(w);
            }
        }
        SubSegments { segments, parent }
    }

    /// Positions of the sub-segments whose window is in `windows`.
    pub fn indices_of(&self, windows: &[usize]) -> Vec<usize> {
        let set: std::collections::HashSet<usize> = windows.iter().copied().collect();
        (0..self.parent.len()).filter(|&i| set.contains(&self.parent[i])).collect()
    }

    /// The window plan carried over to sub-segments.
    pub fn derive_plan(&self, plan: &PartitionPlan) -> PartitionPlan {
        PartitionPlan {
            tr: self.indices_of(&plan.tr),
            v: self.indices_of(&plan.v),
            folds: plan.folds.iter().map(|f| self.indices_of(f)).collect(),
            seed: plan.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    /// One prediction per test window.
    pub ensemble: FoldReport,
    /// One prediction per non-overlapping sub-segment of each test window.
    pub single: FoldReport,
}

/// Cross-validation over windows. Fold `k`'s model trains on the
/// non-overlapping sub-segments of the other folds' windows; each held-out
/// window is scored once by the ensemble and once per sub-segment.
pub fn cross_validate_ensemble(
    windows: &dyn SegmentSource,
    plan: &PartitionPlan,
    point: &GridPoint,
    spec: &ModelSpec,
    cfg: &EnsembleConfig,
) -> Result<EnsembleReport> {
    let (_, seg_len, _) = cfg.lengths()?;
    let per_fold = (0..plan.folds.len())
        .into_par_iter()
        .map(|k| {
            let train = SubSegments::split(windows, &plan.training_folds(k), Access::Fit { fold: k }, seg_len);
            let all: Vec<usize> = (0..train.segments.len()).collect();
            let model = train_task_model(&train.segments, &all, Access::Fit { fold: k }, spec, point)?;
            let mut ens = ConfusionMatrix::default();
            let mut single = ConfusionMatrix::default();
            for &w in &plan.folds[k] {
                let x = windows.samples(w, Access::Evaluate { fold: k });
                let truth = windows.label(w);
                let row = ensemble_predict_row(&model, x, cfg)?;
                ens.add(truth, spec.task.predicted_label(truth, row));
                for piece in split_non_overlapping(x, seg_len) {
                    let row = model.predict_row(&model.featurizer.featurize(piece)?)?;
                    single.add(truth, spec.task.predicted_label(truth, row));
                }
            }
            Ok((ens, single))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ens, single): (Vec<_>, Vec<_>) = per_fold.into_iter().unzip();
    Ok(EnsembleReport {
        config: *cfg,
        ensemble: FoldReport::from_confusions(*point, spec.task, ens)?,
        single: FoldReport::from_confusions(*point, spec.task, single)?,
    })
}

/// Grid search on the non-overlapping sub-segments of the Tr and V windows.
pub fn grid_search_ensemble(
    windows: &dyn SegmentSource,
    plan: &PartitionPlan,
    spec: &ModelSpec,
    family: KernelFamily,
    cfg: &EnsembleConfig,
) -> Result<SearchResult> {
    let (_, seg_len, _) = cfg.lengths()?;
    let tr = SubSegments::split(windows, &plan.tr, Access::SearchFit, seg_len);
    let v = SubSegments::split(windows, &plan.v, Access::SearchEvaluate, seg_len);
    let n_tr = tr.segments.len();
    let mut segments = tr.segments;
    segments.extend(v.segments);
    let sub_plan = PartitionPlan {
        tr: (0..n_tr).collect(),
        v: (n_tr..segments.len()).collect(),
        folds: Vec::new(),
        seed: plan.seed,
    };
    grid_search_points(&segments, &sub_plan, spec, &grid_points(family))
}
