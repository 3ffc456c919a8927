use std::fmt;

/// Failure classes, mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input files, flags or environment (exit 2).
    Input(String),
    /// Anything the user could not have caused, including verification mismatches (exit 1).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Internal(msg) => f.write_str(msg),
        }
    }
}

impl From<fireline_uq_core::Error> for CliError {
    fn from(e: fireline_uq_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
