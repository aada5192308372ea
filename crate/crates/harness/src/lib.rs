//! Experiment runner for the irl-core learners: JSON configuration, paired
//! seeded runs over the sweep axes, summary statistics and CSV output.

pub mod config;
pub mod output;
pub mod runner;
pub mod stats;

pub use config::{Algorithm, AlgorithmSpec, Axis, EnvironmentSpec, ExperimentConfig};
pub use runner::{run_experiment, sweep, ExperimentResult, RunRecord};
