//! Configuration, experiment dispatch and file output behind the `collarflow` binary.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{parse_config, ConfigError, ExperimentConfig, Kind, Perturbation};
pub use experiment::{emit, run_experiment, ExperimentError, Outcome};
