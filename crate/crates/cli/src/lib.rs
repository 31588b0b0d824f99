//! Experiment harness for `crowdpac`: TOML configuration, seeded batch runs
//! and sweeps, CSV/JSON reports, and the analytic `verify` suite.

pub mod config;
pub mod experiment;
pub mod report;
pub mod verify;

use std::path::Path;

pub use config::{AlgorithmChoice, ExperimentConfig};
pub use experiment::{run_experiment, sweep, SweepReport};
pub use report::{ReportRow, SummaryRow, HEADER};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("could not parse config: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("could not write report: {0}")]
    Write(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit code: 1 for validation problems, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } | CliError::Parse(_) => 1,
            CliError::Io { .. } | CliError::Write(_) => 2,
        }
    }
}
