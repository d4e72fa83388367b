use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data failed validation. `row` is the 1-based data row, when known.
    #[error("{}", validation_message(*.row, .reason))]
    Validation { row: Option<usize>, reason: String },

    /// The data cannot support the requested model (e.g. all incomes equal).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn validation_message(row: Option<usize>, reason: &str) -> String {
    match row {
        Some(r) => format!("validation error at row {r}: {reason}"),
        None => format!("validation error: {reason}"),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(row: Option<usize>, reason: impl Into<String>) -> Self {
        Error::Validation {
            row,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
