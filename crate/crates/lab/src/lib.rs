//! File formats, experiment configuration and the end-to-end pipeline around
//! `acmorse-core`.

pub mod config;
pub mod formats;
pub mod pipeline;
pub mod records;

pub use config::{ConfigError, ExperimentConfig};
pub use pipeline::{run_pipeline, verify, Experiment, Stage, StageError};
