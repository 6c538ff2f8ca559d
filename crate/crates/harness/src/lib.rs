//! Datasets, experiment sweeps and reports around the `fairkc` solvers.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod report;
pub mod synth;

pub use config::{load_config, Algorithm, DataSource, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use experiment::{run_algorithm, run_experiment, RunSeed};
pub use report::{emit_report, Format, Report, RunRecord};
pub use synth::{generate_blobs, SyntheticSpec};
