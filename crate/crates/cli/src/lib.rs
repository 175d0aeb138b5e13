//! Configuration-driven front end for the qubit-network synchronization
//! simulator: TOML experiment configs, full/orbit/compare/classical runs,
//! CSV trajectory exports, and threshold-gated run reports.

pub mod config;
pub mod csv;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigFile, Experiment, Mode};
pub use error::CliError;
pub use report::{MetricResult, RunReport};
pub use run::{run_experiment, write_outputs, RunOutcome};

/// Environment variable capping the per-orbit integration thread pool.
pub const THREADS_ENV: &str = "QSYNC_THREADS";
