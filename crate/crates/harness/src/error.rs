use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Usage or configuration problem, detected before any work starts.
    #[error("config error: {0}")]
    Config(String),

    /// A verification suite reported violations.
    #[error("{0} verification violation(s)")]
    Violations(usize),

    /// Numeric or I/O failure while running.
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_CONFIG,
            HarnessError::Violations(_) => EXIT_VIOLATION,
            HarnessError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub(crate) fn config(path: &str, msg: impl std::fmt::Display) -> Self {
        HarnessError::Config(format!("{path}: {msg}"))
    }
}

impl From<cliplab::Error> for HarnessError {
    fn from(e: cliplab::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
