//! CLI-level errors and their process exit codes.

use std::fmt;

/// Exit code 2 covers usage, configuration, data, and I/O problems; exit
/// code 3 is reserved for numerical divergence inside the solver.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Divergence { iteration: usize },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Divergence { iteration } => {
                write!(f, "solver diverged at iteration {iteration}")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Divergence { .. } => 3,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<disagg_core::Error> for CliError {
    fn from(err: disagg_core::Error) -> Self {
        match err {
            disagg_core::Error::NumericalDivergence { iteration } => {
                CliError::Divergence { iteration }
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Usage(err.to_string())
    }
}
