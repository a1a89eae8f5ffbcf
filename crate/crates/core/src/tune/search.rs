//! Grid search on Tr/V and cross-validated evaluation on the folds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{grid_points, ColumnStats, GridPoint, KernelFamily};
use super::partition::PartitionPlan;
use super::source::{Access, SegmentSource};
use crate::ecoc::{column_subset, train_ecoc, EcocModel, LossFn};
use crate::error::{Error, Result};
use crate::label::RhythmLabel;
use crate::metrics::{accuracy, mean_stderr, sensitivity, ConfusionMatrix};
use crate::represent::{Featurizer, RepresentationKind};
use crate::task::Task;

/// Everything about a model except its grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub task: Task,
    pub representation: RepresentationKind,
    pub loss: LossFn,
    /// SMO stopping tolerance.
    pub tol: f64,
}

impl ModelSpec {
    pub fn new(task: Task, representation: RepresentationKind) -> Self {
        ModelSpec {
            task,
            representation,
            loss: LossFn::Hinge,
            tol: 1e-3,
        }
    }
}

/// Featurized training data and the per-column grid anchors.
#[derive(Debug, Clone)]
pub struct PreparedTraining {
    pub featurizer: Featurizer,
    pub features: Vec<Vec<f64>>,
    pub groups: Vec<usize>,
    pub stats: Vec<ColumnStats>,
}

fn group_of(task: Task, label: RhythmLabel) -> Result<usize> {
    task.group_of(label)
        .ok_or_else(|| Error::InvalidArgument(format!("label {label} is not part of task {task}")))
}

/// Fits the featurizer on `indices` and computes column statistics.
pub fn prepare_training(
    source: &dyn SegmentSource,
    indices: &[usize],
    access: Access,
    spec: &ModelSpec,
) -> Result<PreparedTraining> {
    let first = indices
        .first()
        .ok_or_else(|| Error::InsufficientData("empty training set".into()))?;
    let segment_len = source.samples(*first, access).len();
    let task = spec.task;
    let groups = indices
        .iter()
        .map(|&i| group_of(task, source.label(i)))
        .collect::<Result<Vec<_>>>()?;
    let keyed: Vec<(&[f64], RhythmLabel)> = indices
        .iter()
        .zip(&groups)
        .map(|(&i, &g)| (source.samples(i, access), task.group_key(g)))
        .collect();
    let keys: Vec<RhythmLabel> = (0..task.groups().len()).map(|g| task.group_key(g)).collect();
    let featurizer = Featurizer::fit(spec.representation, segment_len, &keyed, &keys)?;
    let features = keyed
        .par_iter()
        .map(|(s, _)| featurizer.featurize(s))
        .collect::<Result<Vec<_>>>()?;
    let matrix = task.coding_matrix();
    let stats = (0..matrix.n_columns())
        .map(|col| {
            let (idx, labels) = column_subset(&groups, &matrix, col);
            let vecs: Vec<&[f64]> = idx.iter().map(|&i| features[i].as_slice()).collect();
            ColumnStats::compute(&vecs, &labels)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedTraining {
        featurizer,
        features,
        groups,
        stats,
    })
}

pub fn train_prepared(prep: &PreparedTraining, spec: &ModelSpec, point: &GridPoint) -> Result<EcocModel> {
    let attach = |e: Error| Error::GridPoint {
        point: point.to_string(),
        source: Box::new(e),
    };
    let params = prep
        .stats
        .iter()
        .map(|s| point.resolve(s).map(|p| p.with_tol(spec.tol)))
        .collect::<Result<Vec<_>>>()
        .map_err(attach)?;
    let training: Vec<(&[f64], usize)> = prep
        .features
        .iter()
        .zip(&prep.groups)
        .map(|(f, &g)| (f.as_slice(), g))
        .collect();
    train_ecoc(
        &training,
        spec.task,
        &spec.task.coding_matrix(),
        &params,
        spec.loss,
        prep.featurizer.clone(),
    )
    .map_err(attach)
}

/// Featurizes and trains in one step.
pub fn train_task_model(
    source: &dyn SegmentSource,
    indices: &[usize],
    access: Access,
    spec: &ModelSpec,
    point: &GridPoint,
) -> Result<EcocModel> {
    train_prepared(&prepare_training(source, indices, access, spec)?, spec, point)
}

/// Confusion matrix of already featurized vectors.
pub fn confusion_of(model: &EcocModel, features: &[Vec<f64>], truth: &[RhythmLabel]) -> Result<ConfusionMatrix> {
    let rows = features
        .par_iter()
        .map(|f| model.predict_row(f))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConfusionMatrix::from_pairs(
        truth.iter().zip(rows).map(|(&t, r)| (t, model.task.predicted_label(t, r))),
    ))
}

pub fn evaluate(
    model: &EcocModel,
    source: &dyn SegmentSource,
    indices: &[usize],
    access: Access,
) -> Result<ConfusionMatrix> {
    let features = indices
        .par_iter()
        .map(|&i| model.featurizer.featurize(source.samples(i, access)))
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<RhythmLabel> = indices.iter().map(|&i| source.label(i)).collect();
    confusion_of(model, &features, &truth)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: GridPoint,
    /// V accuracy of every point, in grid order.
    pub scores: Vec<(GridPoint, f64)>,
}

/// Trains on Tr at every point of `points` and keeps the best V accuracy.
/// Ties go to the earliest point, which is the smallest-parameter point
/// for grids from [`grid_points`].
pub fn grid_search_points(
    source: &dyn SegmentSource,
    plan: &PartitionPlan,
    spec: &ModelSpec,
    points: &[GridPoint],
) -> Result<SearchResult> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty search grid".into()));
    }
    let prep = prepare_training(source, &plan.tr, Access::SearchFit, spec)?;
    let v_features = plan
        .v
        .par_iter()
        .map(|&i| prep.featurizer.featurize(source.samples(i, Access::SearchEvaluate)))
        .collect::<Result<Vec<_>>>()?;
    let v_truth: Vec<RhythmLabel> = plan.v.iter().map(|&i| source.label(i)).collect();
    let scores = points
        .par_iter()
        .map(|p| {
            let model = train_prepared(&prep, spec, p)?;
            let cm = confusion_of(&model, &v_features, &v_truth)?;
            Ok((*p, accuracy(&cm)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.1 > scores[best].1 {
            best = i;
        }
    }
    Ok(SearchResult {
        best: scores[best].0,
        scores,
    })
}

pub fn grid_search(
    source: &dyn SegmentSource,
    plan: &PartitionPlan,
    spec: &ModelSpec,
    family: KernelFamily,
) -> Result<SearchResult> {
    grid_search_points(source, plan, spec, &grid_points(family))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub point: GridPoint,
    pub task: Task,
    pub confusions: Vec<ConfusionMatrix>,
    pub fold_accuracy: Vec<f64>,
    /// Per fold, per class in SR, VT, VF order; `None` for classes the task
    /// does not use.
    pub fold_sensitivity: Vec<[Option<f64>; 3]>,
    pub mean_accuracy: f64,
    pub stderr: f64,
    /// Mean over folds of each class sensitivity.
    pub sensitivity: [Option<f64>; 3],
}

impl FoldReport {
    pub fn from_confusions(point: GridPoint, task: Task, confusions: Vec<ConfusionMatrix>) -> Result<Self> {
        let fold_accuracy = confusions.iter().map(accuracy).collect::<Result<Vec<_>>>()?;
        let mut fold_sensitivity = Vec::with_capacity(confusions.len());
        for cm in &confusions {
            let mut row = [None; 3];
            for label in task.labels() {
                row[label.index()] = Some(sensitivity(cm, label)?);
            }
            fold_sensitivity.push(row);
        }
        let (mean_accuracy, stderr) = mean_stderr(&fold_accuracy)?;
        let mut sens = [None; 3];
        for label in task.labels() {
            let k = label.index();
            let vals: Vec<f64> = fold_sensitivity.iter().filter_map(|r| r[k]).collect();
            sens[k] = Some(vals.iter().sum::<f64>() / vals.len() as f64);
        }
        Ok(FoldReport {
            point,
            task,
            confusions,
            fold_accuracy,
            fold_sensitivity,
            mean_accuracy,
            stderr,
            sensitivity: sens,
        })
    }
}

/// For each fold, fits the featurizer and model on the other folds and
/// scores the held-out one. Tr and V are not used.
pub fn cross_validate(
    source: &dyn SegmentSource,
    plan: &PartitionPlan,
    point: &GridPoint,
    spec: &ModelSpec,
) -> Result<FoldReport> {
    for (k, fold) in plan.folds.iter().enumerate() {
        for label in spec.task.labels() {
            if !fold.iter().any(|&i| source.label(i) == label) {
                return Err(Error::InsufficientData(format!("fold {k} lacks class {label}")));
            }
        }
    }
    let confusions = (0..plan.folds.len())
        .into_par_iter()
        .map(|k| {
            let train = plan.training_folds(k);
            let model = train_task_model(source, &train, Access::Fit { fold: k }, spec, point)?;
            evaluate(&model, source, &plan.folds[k], Access::Evaluate { fold: k })
        })
        .collect::<Result<Vec<_>>>()?;
    FoldReport::from_confusions(*point, spec.task, confusions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tune::grid::KernelStep;

    #[test]
    fn always_sr_report() {
        let cm = ConfusionMatrix { counts: [[8, 0, 0], [8, 0, 0], [8, 0, 0]] };
        let point = GridPoint { c_exponent: 0, kernel: KernelStep::Linear };
        let r = FoldReport::from_confusions(point, Task::ThreeWay, vec![cm; 5]).unwrap();
        assert!((r.mean_accuracy - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.sensitivity, [Some(1.0), Some(0.0), Some(0.0)]);
    }

    #[test]
    fn absent_class_has_no_sensitivity() {
        let cm = ConfusionMatrix { counts: [[0, 0, 0], [0, 9, 1], [2, 0, 8]] };
        let point = GridPoint { c_exponent: 0, kernel: KernelStep::Linear };
        let r = FoldReport::from_confusions(point, Task::VtVsVf, vec![cm; 5]).unwrap();
        assert_eq!(r.sensitivity[0], None);
        assert!((r.sensitivity[1].unwrap() - 0.9).abs() < 1e-15);
    }
}
