//! Presets, configuration, sweeps and output files.

pub mod config;
pub mod output;
pub mod preset;
pub mod run;

pub use config::ExperimentConfig;
pub use output::emit_outputs;
pub use preset::{preset, Metric, Scenario, Target};
pub use run::{oracle_check, run_experiment, ResultRow, RowOutcome, RunReport};
