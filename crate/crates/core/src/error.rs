use std::path::PathBuf;

use thiserror::Error;

use crate::label::RhythmLabel;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the classification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record or annotation file does not follow the text format.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("unsupported sampling rate {0} Hz")]
    UnsupportedRate(u32),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("class {0} is missing from the input")]
    MissingClass(RhythmLabel),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("SMO did not converge within {iterations} iterations (violation {violation:.3e})")]
    NotConverged { iterations: usize, violation: f64 },

    #[error("training failed at grid point {point}: {source}")]
    GridPoint {
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization: {0}")]
    Serde(String),

    #[error("unsupported file format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
