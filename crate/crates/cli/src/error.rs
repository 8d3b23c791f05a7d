use std::fmt;
use std::path::Path;

use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination not caught by the argument parser.
    Usage(String),
    Io(String),
    Core(longmem::Error),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Core(longmem::Error::Parse { .. }) => "parse",
            CliError::Core(longmem::Error::Validation(_)) => "validation",
            CliError::Core(longmem::Error::Numeric(_)) => "numeric",
            CliError::Core(longmem::Error::EpsTooSmall { .. }) => "eps_too_small",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(longmem::Error::Parse { .. }) => 2,
            CliError::Io(_) | CliError::Core(longmem::Error::Validation(_)) => 3,
            CliError::Core(longmem::Error::Numeric(_) | longmem::Error::EpsTooSmall { .. }) => 4,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: u8,
            message: String,
        }
        serde_json::to_string(&Record {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("error record serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<longmem::Error> for CliError {
    fn from(e: longmem::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
