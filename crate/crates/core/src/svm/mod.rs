//! Binary soft-margin kernel SVM.

pub mod kernel;
pub mod model;
pub mod smo;

pub(crate) use kernel::dot;
pub use kernel::KernelSpec;
pub use model::{sign, BinarySvmModel, MODEL_FORMAT_VERSION};
pub use smo::{smo_solve, smo_train, SmoSolution, SvmParams};
