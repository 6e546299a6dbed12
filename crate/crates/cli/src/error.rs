//! Error type with the process exit code baked in: input problems exit 2,
//! cap and size overruns exit 3. (Exit 1 is reserved for successful runs
//! that found a violation or counterexample; that path does not go through
//! errors at all.)

use coalg::error::Error as CoalgError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad usage, unreadable files, parse or validation failures.
    #[error("{0}")]
    Input(String),
    /// An enumeration refused to run because it would exceed the cap.
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

impl From<CoalgError> for CliError {
    fn from(e: CoalgError) -> Self {
        match &e {
            CoalgError::Size { .. } => CliError::Cap(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
