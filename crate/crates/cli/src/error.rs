use qphonon_core::CoreError;
use thiserror::Error;

/// Front-end failures, split by exit code: configuration problems exit 2,
/// anything that goes wrong during a validated run exits 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        CliError::Run(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
