//! End-to-end experiment drivers behind the CLI commands, returning rows
//! ready for CSV output.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::ensemble::{cross_validate_ensemble, grid_search_ensemble, EnsembleConfig, EnsembleReport};
use crate::error::{Error, Result};
use crate::ingest::AnnotatedRecord;
use crate::label::RhythmLabel;
use crate::preprocess::{balance_among, clean_record, segment_samples, window_samples, LabeledSegment, TARGET_FS};
use crate::represent::{psa_count, psa_threshold_classify, psm_count, VfDecision};
use crate::task::Task;
use crate::ecoc::EcocModel;
use crate::tune::{
    cross_validate, grid_search, partition, train_task_model, Access, FoldReport, ModelSpec, SearchResult,
};

/// Cleans every record, cuts `len`-sample windows and balances the classes
/// the task uses.
pub fn load_windows(records: &[AnnotatedRecord], len: usize, task: Task, seed: u64) -> Result<Vec<LabeledSegment>> {
    let per_record = records
        .par_iter()
        .map(|r| clean_record(r).map(|c| segment_samples(&c, len)))
        .collect::<Result<Vec<_>>>()?;
    balance_among(per_record.into_iter().flatten().collect(), &task.labels(), seed)
}

fn model_spec(cfg: &ExperimentConfig) -> ModelSpec {
    ModelSpec {
        task: cfg.task,
        representation: cfg.representation,
        loss: cfg.loss,
        tol: cfg.tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub window_s: f64,
    pub representation: String,
    pub task: String,
    pub kernel: String,
    pub mean_accuracy: f64,
    pub stderr: f64,
    #[serde(rename = "sens_SR")]
    pub sens_sr: Option<f64>,
    #[serde(rename = "sens_VT")]
    pub sens_vt: Option<f64>,
    #[serde(rename = "sens_VF")]
    pub sens_vf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldRow {
    pub fold: usize,
    pub accuracy: f64,
    #[serde(rename = "sens_SR")]
    pub sens_sr: Option<f64>,
    #[serde(rename = "sens_VT")]
    pub sens_vt: Option<f64>,
    #[serde(rename = "sens_VF")]
    pub sens_vf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub grid_point: String,
    pub v_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub n_windows: usize,
    /// Trained on every fold with the chosen grid point.
    pub model: EcocModel,
    pub search: SearchResult,
    pub report: FoldReport,
}

impl RunOutcome {
    pub fn report_row(&self, cfg: &ExperimentConfig) -> ReportRow {
        let s = self.report.sensitivity;
        ReportRow {
            window_s: cfg.window_s,
            representation: cfg.representation.to_string(),
            task: cfg.task.to_string(),
            kernel: cfg.kernel.to_string(),
            mean_accuracy: self.report.mean_accuracy,
            stderr: self.report.stderr,
            sens_sr: s[0],
            sens_vt: s[1],
            sens_vf: s[2],
        }
    }

    pub fn fold_rows(&self) -> Vec<FoldRow> {
        self.report
            .fold_accuracy
            .iter()
            .zip(&self.report.fold_sensitivity)
            .enumerate()
            .map(|(fold, (&accuracy, s))| FoldRow {
                fold,
                accuracy,
                sens_sr: s[0],
                sens_vt: s[1],
                sens_vf: s[2],
            })
            .collect()
    }

    pub fn grid_rows(&self) -> Vec<GridRow> {
        self.search
            .scores
            .iter()
            .map(|(p, a)| GridRow {
                grid_point: p.to_string(),
                v_accuracy: *a,
            })
            .collect()
    }
}

/// Partition, grid search on Tr/V, cross-validation on the folds.
pub fn run_experiment(cfg: &ExperimentConfig, records: &[AnnotatedRecord]) -> Result<RunOutcome> {
    let windows = load_windows(records, window_samples(cfg.window_s)?, cfg.task, cfg.seed)?;
    let labels: Vec<RhythmLabel> = windows.iter().map(|w| w.label).collect();
    let plan = partition(&labels, cfg.seed)?;
    let spec = model_spec(cfg);
    let search = grid_search(&windows, &plan, &spec, cfg.kernel)?;
    let report = cross_validate(&windows, &plan, &search.best, &spec)?;
    let all_folds: Vec<usize> = plan.folds.concat();
    let model = train_task_model(&windows, &all_folds, Access::Fit { fold: usize::MAX }, &spec, &search.best)?;
    Ok(RunOutcome {
        n_windows: windows.len(),
        model,
        search,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRow {
    pub window_s: f64,
    pub segment_s: f64,
    pub shift_s: f64,
    pub aggregation: String,
    pub task: String,
    pub representation: String,
    pub kernel: String,
    pub grid_point: String,
    pub mean_accuracy: f64,
    pub stderr: f64,
    #[serde(rename = "sens_SR")]
    pub sens_sr: Option<f64>,
    #[serde(rename = "sens_VT")]
    pub sens_vt: Option<f64>,
    #[serde(rename = "sens_VF")]
    pub sens_vf: Option<f64>,
    pub single_accuracy: f64,
    pub single_stderr: f64,
}

/// One ensemble configuration: windows of `window_s`, grid search on the
/// sub-segments of Tr/V, cross-validation with ensemble and single-segment
/// scoring.
pub fn run_ensemble(
    cfg: &ExperimentConfig,
    ens: &EnsembleConfig,
    records: &[AnnotatedRecord],
) -> Result<EnsembleReport> {
    let (window_len, _, _) = ens.lengths()?;
    let windows = load_windows(records, window_len, cfg.task, cfg.seed)?;
    let labels: Vec<RhythmLabel> = windows.iter().map(|w| w.label).collect();
    let plan = partition(&labels, cfg.seed)?;
    let spec = model_spec(cfg);
    let search = grid_search_ensemble(&windows, &plan, &spec, cfg.kernel, ens)?;
    cross_validate_ensemble(&windows, &plan, &search.best, &spec, ens)
}

pub fn ensemble_row(cfg: &ExperimentConfig, r: &EnsembleReport) -> EnsembleRow {
    let s = r.ensemble.sensitivity;
    EnsembleRow {
        window_s: r.config.window_s,
        segment_s: r.config.segment_s,
        shift_s: r.config.shift_s,
        aggregation: r.config.aggregation.to_string(),
        task: cfg.task.to_string(),
        representation: cfg.representation.to_string(),
        kernel: cfg.kernel.to_string(),
        grid_point: r.ensemble.point.to_string(),
        mean_accuracy: r.ensemble.mean_accuracy,
        stderr: r.ensemble.stderr,
        sens_sr: s[0],
        sens_vt: s[1],
        sens_vf: s[2],
        single_accuracy: r.single.mean_accuracy,
        single_stderr: r.single.stderr,
    }
}

/// Every configuration of the sweep, in order.
pub fn run_ensemble_sweep(cfg: &ExperimentConfig, records: &[AnnotatedRecord]) -> Result<Vec<EnsembleRow>> {
    cfg.ensemble
        .configs()
        .iter()
        .map(|e| run_ensemble(cfg, e, records).map(|r| ensemble_row(cfg, &r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsaRow {
    pub record_id: String,
    pub start: usize,
    pub label: RhythmLabel,
    pub eta_psa: f64,
    pub psa_vf: bool,
    pub eta_psm: f64,
    pub psm_vf: bool,
}

/// PSA and PSM occupancy for every `window_s` window of every record; no
/// balancing.
pub fn psa_batch(records: &[AnnotatedRecord], window_s: f64) -> Result<Vec<PsaRow>> {
    let len = (window_s * f64::from(TARGET_FS)).round() as usize;
    if !(window_s.is_finite() && window_s > 0.0) || len == 0 {
        return Err(Error::Config(format!("invalid window {window_s} s")));
    }
    let per_record = records
        .par_iter()
        .map(|r| {
            let clean = clean_record(r)?;
            segment_samples(&clean, len)
                .into_iter()
                .map(|s| {
                    let psa = psa_count(&s.samples, TARGET_FS)?;
                    let psm = psm_count(&s.samples)?;
                    Ok(PsaRow {
                        record_id: s.record_id,
                        start: s.start,
                        label: s.label,
                        eta_psa: psa.eta,
                        psa_vf: psa_threshold_classify(&psa) == VfDecision::Vf,
                        eta_psm: psm.eta,
                        psm_vf: psa_threshold_classify(&psm) == VfDecision::Vf,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_record.into_iter().flatten().collect())
}

/// Writes rows with a header line.
pub fn write_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Serde(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
