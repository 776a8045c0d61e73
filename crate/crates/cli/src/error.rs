use std::fmt;

use photonic_ising::Error as CoreError;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad manifest, arguments or input files (exit 2).
    Config(String),
    /// Evaluator or enumeration capacity exceeded (exit 3).
    Capacity(String),
    /// Numerical failure inside the pipeline (exit 4).
    Numerical(String),
    /// Output could not be written (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Capacity(m) => write!(f, "capacity error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Capacity { .. } => CliError::Capacity(msg),
            CoreError::Numerical(_) | CoreError::UndefinedFidelity(_) | CoreError::Sampling(_) => CliError::Numerical(msg),
            CoreError::Evaluation { source, .. } => match CliError::from(*source) {
                CliError::Capacity(_) => CliError::Capacity(msg),
                CliError::Numerical(_) => CliError::Numerical(msg),
                CliError::Io(_) => CliError::Io(msg),
                CliError::Config(_) => CliError::Config(msg),
            },
            CoreError::Io(_) => CliError::Io(msg),
            CoreError::Dimension(_) | CoreError::InvalidValue(_) | CoreError::Config(_) | CoreError::Json(_) => {
                CliError::Config(msg)
            }
        }
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

pub type CliResult<T> = Result<T, CliError>;
