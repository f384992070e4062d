//! Experiment runner behind the `quasispec` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::ExperimentConfig;
pub use report::{emit_report, Report};
pub use run::{exit_code, run_experiment};
