//! Hyperparameter grids, the data partition, grid search and
//! cross-validated evaluation.

mod grid;
mod partition;
mod search;
mod source;

pub use grid::{
    c_grid, d_mean, gamma_grid, grid_points, poly_c_start, poly_grid, ColumnStats, GridPoint, KernelFamily,
    KernelStep,
};
pub use partition::{partition, PartitionPlan, N_FOLDS};
pub use search::{
    confusion_of, cross_validate, evaluate, grid_search, grid_search_points, prepare_training, train_prepared,
    train_task_model, FoldReport, ModelSpec, PreparedTraining, SearchResult,
};
pub use source::{Access, SegmentSource};
