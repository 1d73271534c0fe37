use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("objective `{objective}` does not provide {capability}")]
    Unsupported {
        objective: String,
        capability: &'static str,
    },

    #[error("exponent {exponent:.3e} exceeds the overflow guard at {location}")]
    Overflow { location: String, exponent: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate:e})")]
    NonConvergence { estimate: f64, iterations: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("at point {index}: {source}")]
    AtPoint { index: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_point(self, index: usize) -> Error {
        Error::AtPoint {
            index,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
