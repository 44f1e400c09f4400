use prepost_core::Error as CoreError;
use thiserror::Error;

/// Failure of a command before a result document could be produced.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::RetryExhausted { .. } | CoreError::SingularD | CoreError::ZeroAcceptance { .. } => {
                CliError::Runtime(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

/// Exit status of a document whose tolerance checks failed.
pub const TOLERANCE_FAILURE: i32 = 3;
