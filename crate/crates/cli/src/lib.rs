//! Experiment harness for the dichotomy-spectrum observer library: the
//! `spectrum`, `observe`, `ensemble`, and `verify` commands, configuration
//! handling, summary statistics, and CSV emission.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod stats;

pub use error::CliError;

/// Process exit code for a command outcome.
pub fn exit_code(result: &Result<(), CliError>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(CliError::Config(_)) | Err(CliError::Io(_)) => 1,
        Err(CliError::Numeric(_)) => 2,
        Err(CliError::Verification { .. }) => 3,
    }
}
