use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input violates a precondition (length, range, parameter bounds).
    #[error("{0}")]
    Validation(String),

    /// The computation itself is undefined for this input (zero variance, ...).
    #[error("{0}")]
    Numeric(String),

    /// No reference point gathered enough neighbours within the radius.
    #[error(
        "eps too small: no reference point has {k_min} neighbours within the radius \
         (largest neighbour count found: {max_found})"
    )]
    EpsTooSmall { k_min: usize, max_found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
