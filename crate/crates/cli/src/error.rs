//! Job-level errors and their process exit codes.

use serde::Serialize;
use thiserror::Error;

/// Everything that can stop a job.
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration failed schema or range validation.
    #[error("config error: {0}")]
    Config(String),
    /// A referenced dataset is missing or malformed.
    #[error("data error: {0}")]
    Data(String),
    /// An iterate became non-finite in a job that does not allow it.
    #[error("numeric blow-up: {0}")]
    BlowUp(String),
    /// Transfer stage 1 ended above its loss threshold.
    #[error("transfer stage 1 did not converge: {0}")]
    StageOne(String),
    /// Writing the result bundle failed.
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
    /// Any other library failure.
    #[error(transparent)]
    Core(tusla::Error),
}

impl From<tusla::Error> for CliError {
    fn from(e: tusla::Error) -> Self {
        match e {
            tusla::Error::Data { .. } => CliError::Data(e.to_string()),
            tusla::Error::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Core(other),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    /// Exit status: 2 config, 3 data, 4 blow-up, 5 transfer stage 1, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::BlowUp(_) => 4,
            CliError::StageOne(_) => 5,
            CliError::Io(_) | CliError::Core(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::BlowUp(_) => "blow_up",
            CliError::StageOne(_) => "stage_one",
            CliError::Io(_) => "io",
            CliError::Core(_) => "core",
        }
    }

    /// Machine-readable error report.
    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

/// The structured error report printed on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, CliError>;
