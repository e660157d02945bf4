//! Command implementations behind the `yamabe` binary. Each command reads a
//! [`RunConfig`], writes its files and returns the text for stdout together
//! with an overall pass flag.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;

use yamabe_lab::LabError;

pub use config::RunConfig;

/// Process exit codes.
pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        let code = match e {
            LabError::Quadrature { .. } | LabError::Singular(_) | LabError::Consistency { .. } => EXIT_CHECK_FAILED,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::config(e.to_string())
    }
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub passed: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}
