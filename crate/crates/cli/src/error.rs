use std::fmt;

/// Failures mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, unknown id or invalid input: exit 2.
    Config(String),
    /// Overflow, non-finite values or history underflow during a run: exit 3.
    Numeric(String),
    /// Filesystem or serialisation trouble: exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn from_core(e: svlab::Error) -> Self {
        match e {
            e if e.is_numeric() => CliError::Numeric(e.to_string()),
            svlab::Error::Io(_) | svlab::Error::Csv(_) | svlab::Error::Json(_) => CliError::Io(e.to_string()),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<svlab::Error> for CliError {
    fn from(e: svlab::Error) -> Self {
        CliError::from_core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
