//! Experiment driver: configuration, dispatch and artifact emission.

pub mod config;
mod run;

pub use config::{parse_config, ParsedConfig};
pub use run::{run, Command, ExperimentSpec, RunSummary};

use stratflow_core::Error;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Numeric(String),
    /// Exit code 4.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) => write!(f, "configuration error: {s}"),
            CliError::Numeric(s) => write!(f, "numerical error: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::InvalidLattice(_)
            | Error::EmptyShell(_)
            | Error::GridTooCoarse { .. } => CliError::Config(e.to_string()),
            Error::Io(_) | Error::Cache(_) => CliError::Io(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
