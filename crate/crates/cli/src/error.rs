use thiserror::Error;

/// Command failures, mapped to process exit codes (config/IO: 1,
/// numerical: 2, verification: 3).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<dichotomy_core::Error> for CliError {
    fn from(e: dichotomy_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}
