use crate::angle::AngleError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_MONOTONE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{0}")]
    Monotone(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) | CliError::Validation(_) => EXIT_DATA,
            CliError::Monotone(_) => EXIT_MONOTONE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<trframe::Error> for CliError {
    fn from(e: trframe::Error) -> Self {
        match e {
            trframe::Error::MonotoneViolation(_) => CliError::Monotone(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<AngleError> for CliError {
    fn from(e: AngleError) -> Self {
        CliError::Usage(e.to_string())
    }
}
