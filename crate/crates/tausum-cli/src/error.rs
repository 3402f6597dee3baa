//! CLI error classification and the exit-code contract.
//!
//! Exit codes: 0 success, 1 verification failure, 2 precision target not
//! met, 3 resource cap exceeded, 64 usage error, 74 I/O error.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Precision(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Verification(_) => 1,
            CliError::Precision(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Io(_) => 74,
        }
    }
}

impl From<tausum::Error> for CliError {
    fn from(e: tausum::Error) -> CliError {
        match e {
            tausum::Error::Domain(_) => CliError::Usage(e.to_string()),
            tausum::Error::Cap { .. } => CliError::Cap(e.to_string()),
            tausum::Error::Precision { .. } => CliError::Precision(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> CliError {
        CliError::Io(e.to_string())
    }
}
