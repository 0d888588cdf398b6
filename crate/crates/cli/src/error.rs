use std::fmt;

use greedyprune::io::IoError;
use greedyprune::Error;

/// Command failure, classified by exit code: 2 usage, 3 I/O, 4 algorithmic.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Algorithm(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Algorithm(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Algorithm(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::GridMismatch { .. } | Error::BudgetExceedsN { .. } | Error::InvalidParameter(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Algorithm(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e.to_string())
    }
}
