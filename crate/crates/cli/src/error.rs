use std::fmt;

use repeater_core::error::Error as CoreError;

/// CLI failure, carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments or a failed run step that is not the config's fault (1).
    Usage(String),
    /// Unreadable, malformed or invalid configuration (2).
    Config(String),
    /// A guarded computation refused to start (3).
    SizeGuard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::SizeGuard(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::SizeGuard(m) => write!(f, "refused: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::SizeGuard(m) => CliError::SizeGuard(m),
            CoreError::Config(m) => CliError::Config(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("I/O: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
