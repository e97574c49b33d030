use thermolam::Error;

/// Failures mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration: exit 2.
    Config(String),
    /// Error raised by the laboratory itself.
    Core(Error),
    /// A check ran to completion and did not hold: exit 5.
    Failed(String),
    /// Output could not be written: exit 1.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidParams(_) | Error::Usage(_) => 2,
                Error::Numerical { .. } | Error::Truncation(_) => 3,
                Error::Regime(_) => 4,
                Error::Verification(_) => 5,
            },
            CliError::Failed(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Failed(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
