pub mod config;
pub mod dsp;
pub mod ecoc;
pub mod ensemble;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod label;
pub mod metrics;
pub mod preprocess;
pub mod represent;
pub mod rng;
pub mod svm;
pub mod synth;
pub mod task;
pub mod tune;

pub use error::{Error, Result};
pub use label::RhythmLabel;
