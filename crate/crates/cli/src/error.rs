use pcc_core::PccError;
use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A check the command exists to perform did not hold.
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::BadInput(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn bad_input(msg: impl Into<String>) -> Self {
        CliError::BadInput(msg.into())
    }
}

impl From<PccError> for CliError {
    fn from(e: PccError) -> Self {
        match e {
            PccError::IntegrationFailure { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::BadInput(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
