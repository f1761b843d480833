//! Experiment orchestration: config parsing, replicated runs, CSV
//! emission, scaling sweeps with log-log slope fits, and the structural
//! validation suite.

pub mod config;
pub mod emit;
pub mod error;
pub mod runner;
pub mod scaling;
pub mod validate;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use runner::{run_experiment, RunOutcome};
pub use scaling::{scaling_sweep, Axis, ScalingSummary};
