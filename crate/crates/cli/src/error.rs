use std::fmt;

/// Failure of a CLI run, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed files: exit 2.
    Input(String),
    /// The computation itself failed: exit 1.
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl From<tarry_core::Error> for CliError {
    fn from(e: tarry_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Compute(e.to_string())
        }
    }
}
