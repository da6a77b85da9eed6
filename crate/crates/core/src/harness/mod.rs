//! Experiment harness: hyperparameter search, multi-seed suites over datasets
//! and versions, summary statistics and report files.

pub mod config;
pub mod grid;
pub mod record;
pub mod report;
pub mod stats;
pub mod suite;

pub use config::ExperimentConfig;
pub use grid::{grid_search, GridSpec, Selection};
pub use record::ResultRecord;
pub use report::{report, ReportFormat};
pub use stats::{pearson, relative_improvement};
pub use suite::run_suite;
