//! Configuration, experiment orchestration and reports.

pub mod config;
mod experiments;
mod grid_file;
pub mod report;
mod scenario;

use thiserror::Error;

pub use config::{BitsSpec, ChannelModel, ScenarioConfig};
pub use experiments::{
    prepare_training_set, reproduce_tables, run_scenario, simulate, sweep_cond, train, TablesReport, TrainOutcome,
    BASELINE_BITS, REFERENCE_FIXED_CR, REFERENCE_TRAINED,
};
pub use grid_file::{read_grid, write_grid, GRID_MAGIC, GRID_VERSION};
pub use report::{emit_report, parse_csv, to_csv_string, ProfileRow, ReportRecord, RunReport, ScenarioRow, TableRow};
pub use scenario::{make_channel, PreparedScenario, ScenarioMetrics, ScenarioSeeds};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    /// A pipeline stage failed numerically.
    #[error("{stage} stage failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("parse error at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
