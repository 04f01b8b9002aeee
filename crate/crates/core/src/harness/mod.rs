//! Configuration, training runs, grid evaluation and report output.

pub mod config;
pub mod grid;
pub mod stats;
pub mod svg;
pub mod training;

pub use config::{RunConfig, RunOptions};
pub use grid::{
    read_cells, run_grid_eval, summarize, write_grid_outputs, CellResult, FnPolicy, GridEvalConfig,
    GridResult, Policy, SummaryRow,
};
pub use stats::{chi_square_uniform, moving_average, task_histograms, HistogramRow};
pub use training::{read_episode_records, run_training, train_seed, SeedOutcome};
