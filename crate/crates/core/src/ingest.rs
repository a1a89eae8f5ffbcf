//! Plain-text annotated ECG records.
//!
//! A record is stored as two files. The sample file starts with two header
//! lines, `#fs=<int>` and `#id=<string>`, followed by one decimal sample per
//! line. The sidecar `<name>.ann` holds one `<start> <end> <LABEL>` line per
//! rhythm interval, with `end` exclusive.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::RhythmLabel;

/// File extension used for sample files when scanning a directory.
pub const RECORD_EXTENSION: &str = "ecg";
pub const ANNOTATION_EXTENSION: &str = "ann";

/// Sampling rates accepted at ingest.
pub const SUPPORTED_RATES: [u32; 3] = [100, 250, 360];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub label: RhythmLabel,
}

impl Annotation {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// A single-channel ECG trace with labeled rhythm intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedRecord {
    pub record_id: String,
    pub fs: u32,
    pub samples: Vec<f64>,
    pub annotations: Vec<Annotation>,
}

impl AnnotatedRecord {
    /// Builds a record and checks its invariants.
    pub fn new(
        record_id: impl Into<String>,
        fs: u32,
        samples: Vec<f64>,
        annotations: Vec<Annotation>,
    ) -> Result<Self> {
        let record = AnnotatedRecord {
            record_id: record_id.into(),
            fs,
            samples,
            annotations,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_RATES.contains(&self.fs) {
            return Err(Error::UnsupportedRate(self.fs));
        }
        if self.samples.is_empty() {
            return Err(Error::InvalidRecord(format!(
                "record {} has no samples",
                self.record_id
            )));
        }
        if self.samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("record samples"));
        }
        validate_annotations(&self.annotations, self.samples.len())
            .map_err(|(i, msg)| Error::InvalidRecord(format!("annotation {}: {msg}", i + 1)))
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.fs)
    }
}

fn validate_annotations(
    annotations: &[Annotation],
    n_samples: usize,
) -> std::result::Result<(), (usize, String)> {
    let mut prev_end = 0usize;
    for (i, a) in annotations.iter().enumerate() {
        if a.start >= a.end {
            return Err((i, format!("empty interval [{}, {})", a.start, a.end)));
        }
        if a.end > n_samples {
            return Err((
                i,
                format!(
                    "interval [{}, {}) exceeds record length {n_samples}",
                    a.start, a.end
                ),
            ));
        }
        if i > 0 && a.start < prev_end {
            return Err((
                i,
                format!(
                    "interval [{}, {}) overlaps or precedes the previous one",
                    a.start, a.end
                ),
            ));
        }
        prev_end = a.end;
    }
    Ok(())
}

/// Path of the annotation sidecar belonging to a sample file.
pub fn annotation_path(path: &Path) -> PathBuf {
    path.with_extension(ANNOTATION_EXTENSION)
}

/// Reads a sample file and its `.ann` sidecar.
pub fn load_record(path: impl AsRef<Path>) -> Result<AnnotatedRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (record_id, fs, samples) = parse_samples(path, &text)?;

    let ann_path = annotation_path(path);
    let ann_text = fs::read_to_string(&ann_path).map_err(|e| Error::io(&ann_path, e))?;
    let annotations = parse_annotations(&ann_path, &ann_text, samples.len())?;

    AnnotatedRecord::new(record_id, fs, samples, annotations)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_samples(path: &Path, text: &str) -> Result<(String, u32, Vec<f64>)> {
    let mut lines = text.lines();

    let fs_line = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing `#fs=` header"))?;
    let fs_value = fs_line
        .trim_end()
        .strip_prefix("#fs=")
        .ok_or_else(|| parse_err(path, 1, "expected `#fs=<int>` header"))?;
    let fs: u32 = fs_value
        .parse()
        .map_err(|_| parse_err(path, 1, format!("sampling rate {fs_value:?} is not an integer")))?;
    if !SUPPORTED_RATES.contains(&fs) {
        return Err(parse_err(
            path,
            1,
            format!("sampling rate {fs} Hz not in {SUPPORTED_RATES:?}"),
        ));
    }

    let id_line = lines
        .next()
        .ok_or_else(|| parse_err(path, 2, "missing `#id=` header"))?;
    let record_id = id_line
        .trim_end()
        .strip_prefix("#id=")
        .ok_or_else(|| parse_err(path, 2, "expected `#id=<string>` header"))?
        .to_string();

    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 3;
        let field = line.trim();
        if field.is_empty() {
            continue;
        }
        let v: f64 = field
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("sample {field:?} is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(path, line_no, format!("sample {field:?} is not finite")));
        }
        samples.push(v);
    }
    if samples.is_empty() {
        return Err(parse_err(path, 3, "record has no samples"));
    }
    Ok((record_id, fs, samples))
}

fn parse_annotations(path: &Path, text: &str, n_samples: usize) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    let mut line_numbers = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected `<start> <end> <LABEL>`, found {} fields", fields.len()),
            ));
        }
        let start: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("field 1: bad start {:?}", fields[0])))?;
        let end: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("field 2: bad end {:?}", fields[1])))?;
        let label: RhythmLabel = fields[2]
            .parse()
            .map_err(|e: crate::label::UnknownLabel| parse_err(path, line_no, format!("field 3: {e}")))?;
        out.push(Annotation { start, end, label });
        line_numbers.push(line_no);
    }
    validate_annotations(&out, n_samples)
        .map_err(|(i, msg)| parse_err(path, line_numbers[i], msg))?;
    Ok(out)
}

/// Serializes the sample file contents. `f64` values are written in their
/// shortest round-trip decimal form, so reading them back is bit-exact.
pub fn format_samples(record: &AnnotatedRecord) -> String {
    let mut s = String::with_capacity(record.samples.len() * 12 + 32);
    let _ = writeln!(s, "#fs={}", record.fs);
    let _ = writeln!(s, "#id={}", record.record_id);
    for v in &record.samples {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn format_annotations(annotations: &[Annotation]) -> String {
    let mut s = String::new();
    for a in annotations {
        let _ = writeln!(s, "{} {} {}", a.start, a.end, a.label);
    }
    s
}

/// Writes `path` and its `.ann` sidecar.
pub fn write_record(record: &AnnotatedRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_samples(record)).map_err(|e| Error::io(path, e))?;
    let ann = annotation_path(path);
    fs::write(&ann, format_annotations(&record.annotations)).map_err(|e| Error::io(&ann, e))?;
    Ok(())
}

/// Loads every `*.ecg` file in `dir`, sorted by file name.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<AnnotatedRecord>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == RECORD_EXTENSION))
        .collect();
    paths.sort();
    paths.iter().map(load_record).collect()
}

/// One contiguous run of samples per annotation interval, in annotation order.
pub fn extract_labeled_runs(record: &AnnotatedRecord) -> Vec<(&[f64], RhythmLabel)> {
    record
        .annotations
        .iter()
        .map(|a| (&record.samples[a.start..a.end], a.label))
        .collect()
}
