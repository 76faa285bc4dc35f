use std::fmt;
use std::process::ExitCode;

/// Command failure, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad input files or configuration (exit 2).
    Input(String),
    /// Numerical or domain failure while computing (exit 3).
    Numerical(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<rentgam::Error> for CliError {
    fn from(e: rentgam::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}
