use std::fmt;

/// A failed run, classified by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Malformed or unreadable input; exit code 2.
    Input(String),
    /// The computation broke one of its invariants; exit code 3.
    Invariant(String),
    /// Results could not be written; exit code 1.
    Output(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        CliError::Invariant(msg.into())
    }

    pub fn output(msg: impl Into<String>) -> Self {
        CliError::Output(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Output(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
