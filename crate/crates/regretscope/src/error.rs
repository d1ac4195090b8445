use regretscope_core::Error as CoreError;

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::EnumerationBudget { .. } => {
                CliError::Budget(format!("{e}; use the empirical maze learner for large token spaces"))
            }
            CoreError::TokenBudget { .. } => CliError::Budget(e.to_string()),
            CoreError::NumericalFailure { .. } | CoreError::Unsolvable | CoreError::SteppedTerminal => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
