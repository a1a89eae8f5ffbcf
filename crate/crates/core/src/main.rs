use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use rhythmsvm::config::{ExperimentConfig, RawConfig, RawEnsemble};
use rhythmsvm::ecoc::ECOC_FORMAT_VERSION;
use rhythmsvm::experiment::{psa_batch, run_ensemble_sweep, run_experiment, write_csv};
use rhythmsvm::ingest::{load_dir, write_record, AnnotatedRecord, RECORD_EXTENSION};
use rhythmsvm::preprocess::{balance_classes, clean_record, segment};
use rhythmsvm::represent::pca::BASIS_FORMAT_VERSION;
use rhythmsvm::svm::MODEL_FORMAT_VERSION;
use rhythmsvm::synth::{gen_corpus, CorpusSpec};
use rhythmsvm::Error;

const WORKERS_ENV: &str = "RHYTHMSVM_WORKERS";

#[derive(Parser)]
#[command(name = "rhythmsvm", version, about = "SR / VT / VF rhythm classification with kernel SVMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labeled corpus.
    Synth(SynthArgs),
    /// Clean records to 100 Hz and optionally list balanced windows.
    Preprocess(PreprocessArgs),
    /// Grid search and cross-validated evaluation; writes report.csv.
    Run(ExperimentArgs),
    /// Sweep ensemble options; writes ensemble.csv.
    Ensemble(ExperimentArgs),
    /// PSA/PSM occupancy and threshold decisions per window; writes psa.csv.
    Psa(PsaArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    n_per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 250)]
    fs: u32,
    #[arg(long, default_value_t = 20.0)]
    duration: f64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write segments.csv listing balanced windows of this length.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    window: Option<f64>,
    /// time, spectrum or pca<N>
    #[arg(long)]
    representation: Option<String>,
    /// linear, polynomial or rbf
    #[arg(long)]
    kernel: Option<String>,
    /// three-way, nonvf-vs-vf or vt-vs-vf
    #[arg(long)]
    task: Option<String>,
    /// hinge, hamming, exponential or linear
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Ensemble window lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    ens_windows: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ens_segments: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ens_shifts: Option<Vec<f64>>,
    /// mean, median, majority or max
    #[arg(long)]
    aggregation: Option<String>,
}

#[derive(Args)]
struct PsaArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8.0)]
    window: f64,
}

/// Failure class, mapped to the exit code.
enum Failure {
    Validation(Error),
    Runtime(Error),
}

type CmdResult = Result<(), Failure>;

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e)
}

fn validation(e: Error) -> Failure {
    Failure::Validation(e)
}

impl ExperimentArgs {
    fn resolve(self) -> Result<ExperimentConfig, Error> {
        let file = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        let ensemble = (self.ens_windows.is_some()
            || self.ens_segments.is_some()
            || self.ens_shifts.is_some()
            || self.aggregation.is_some())
        .then_some(RawEnsemble {
            window_s: self.ens_windows,
            segment_s: self.ens_segments,
            shift_s: self.ens_shifts,
            aggregation: self.aggregation,
        });
        let over = RawConfig {
            data_dir: self.data,
            output_dir: self.out,
            window_s: self.window,
            representation: self.representation,
            kernel: self.kernel,
            task: self.task,
            loss: self.loss,
            seed: self.seed,
            tol: self.tol,
            ensemble,
        };
        ExperimentConfig::from_raw(file.merge(over))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a ExperimentConfig,
    records: Vec<&'a str>,
    n_windows: Option<usize>,
    model_format_version: u32,
    basis_format_version: u32,
    ecoc_format_version: u32,
    outputs: Vec<&'a str>,
}

fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn load_records(dir: &Path) -> Result<Vec<AnnotatedRecord>, Error> {
    let records = load_dir(dir)?;
    if records.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no .{RECORD_EXTENSION} records in {}",
            dir.display()
        )));
    }
    info!("loaded {} records from {}", records.len(), dir.display());
    Ok(records)
}

fn manifest<'a>(
    command: &'a str,
    cfg: &'a ExperimentConfig,
    records: &'a [AnnotatedRecord],
    n_windows: Option<usize>,
    outputs: Vec<&'a str>,
) -> Manifest<'a> {
    Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: cfg,
        records: records.iter().map(|r| r.record_id.as_str()).collect(),
        n_windows,
        model_format_version: MODEL_FORMAT_VERSION,
        basis_format_version: BASIS_FORMAT_VERSION,
        ecoc_format_version: ECOC_FORMAT_VERSION,
        outputs,
    }
}

fn cmd_synth(a: SynthArgs) -> CmdResult {
    let spec = CorpusSpec {
        n_per_class: a.n_per_class,
        seed: a.seed,
        fs: a.fs,
        duration_s: a.duration,
        noise: a.noise,
    };
    if spec.n_per_class == 0 {
        return Err(validation(Error::Config("n-per-class must be positive".into())));
    }
    let corpus = gen_corpus(&spec).map_err(validation)?;
    create_dir(&a.out).map_err(runtime)?;
    for r in &corpus {
        let path = a.out.join(format!("{}.{RECORD_EXTENSION}", r.record_id));
        write_record(r, &path).map_err(runtime)?;
    }
    info!("wrote {} records to {}", corpus.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct SegmentRow<'a> {
    record_id: &'a str,
    start: usize,
    len: usize,
    label: rhythmsvm::RhythmLabel,
}

fn cmd_preprocess(a: PreprocessArgs) -> CmdResult {
    if let Some(w) = a.window {
        rhythmsvm::preprocess::window_samples(w).map_err(validation)?;
    }
    let records = load_records(&a.data).map_err(runtime)?;
    let clean_dir = a.out.join("clean");
    create_dir(&clean_dir).map_err(runtime)?;
    let mut cleaned = Vec::with_capacity(records.len());
    for r in &records {
        let c = clean_record(r).map_err(runtime)?;
        let path = clean_dir.join(format!("{}.{RECORD_EXTENSION}", c.record_id));
        write_record(&c.to_annotated(), &path).map_err(runtime)?;
        cleaned.push(c);
    }
    if let Some(w) = a.window {
        let mut all = Vec::new();
        for c in &cleaned {
            all.extend(segment(c, w).map_err(runtime)?);
        }
        let balanced = balance_classes(all, a.seed).map_err(runtime)?;
        let rows: Vec<SegmentRow> = balanced
            .iter()
            .map(|s| SegmentRow {
                record_id: &s.record_id,
                start: s.start,
                len: s.samples.len(),
                label: s.label,
            })
            .collect();
        write_csv(a.out.join("segments.csv"), &rows).map_err(runtime)?;
        info!("{} balanced windows", rows.len());
    }
    Ok(())
}

fn cmd_run(a: ExperimentArgs) -> CmdResult {
    let cfg = a.resolve().map_err(validation)?;
    let records = load_records(&cfg.data_dir).map_err(runtime)?;
    let outcome = run_experiment(&cfg, &records).map_err(runtime)?;
    let row = outcome.report_row(&cfg);
    info!(
        "{} windows, best {}, accuracy {:.4} ± {:.4}",
        outcome.n_windows, outcome.search.best, row.mean_accuracy, row.stderr
    );
    let out = &cfg.output_dir;
    create_dir(out).map_err(runtime)?;
    write_csv(out.join("report.csv"), &[row]).map_err(runtime)?;
    write_csv(out.join("folds.csv"), &outcome.fold_rows()).map_err(runtime)?;
    write_csv(out.join("grid.csv"), &outcome.grid_rows()).map_err(runtime)?;
    outcome.model.save(out.join("model.json")).map_err(runtime)?;
    let m = manifest(
        "run",
        &cfg,
        &records,
        Some(outcome.n_windows),
        vec!["report.csv", "folds.csv", "grid.csv", "model.json"],
    );
    write_manifest(&out.join("manifest.json"), &m).map_err(runtime)
}

fn cmd_ensemble(a: ExperimentArgs) -> CmdResult {
    let cfg = a.resolve().map_err(validation)?;
    let records = load_records(&cfg.data_dir).map_err(runtime)?;
    let rows = run_ensemble_sweep(&cfg, &records).map_err(runtime)?;
    for r in &rows {
        info!(
            "window {} s, segment {} s, shift {} s: ensemble {:.4}, single {:.4}",
            r.window_s, r.segment_s, r.shift_s, r.mean_accuracy, r.single_accuracy
        );
    }
    let out = &cfg.output_dir;
    create_dir(out).map_err(runtime)?;
    write_csv(out.join("ensemble.csv"), &rows).map_err(runtime)?;
    let m = manifest("ensemble", &cfg, &records, None, vec!["ensemble.csv"]);
    write_manifest(&out.join("manifest.json"), &m).map_err(runtime)
}

fn cmd_psa(a: PsaArgs) -> CmdResult {
    if !(a.window.is_finite() && a.window > 0.5) {
        return Err(validation(Error::Config(format!(
            "window must exceed the 0.5 s delay, got {}",
            a.window
        ))));
    }
    let records = load_records(&a.data).map_err(runtime)?;
    let rows = psa_batch(&records, a.window).map_err(runtime)?;
    let correct = rows
        .iter()
        .filter(|r| r.psa_vf == (r.label == rhythmsvm::RhythmLabel::VF))
        .count();
    info!(
        "{} windows, PSA VF/non-VF agreement {:.4}",
        rows.len(),
        correct as f64 / rows.len().max(1) as f64
    );
    create_dir(&a.out).map_err(runtime)?;
    write_csv(a.out.join("psa.csv"), &rows).map_err(runtime)
}

fn init_workers() -> Result<(), Error> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Run(a) => cmd_run(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Psa(a) => cmd_psa(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
