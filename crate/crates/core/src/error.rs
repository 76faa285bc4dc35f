use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the cleaning, validation and modelling stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} is outside the domain [{min}, {max}]")]
    OutOfDomain { value: f64, min: f64, max: f64 },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("missing base period {0}")]
    MissingBase(String),

    #[error("unknown term `{0}`")]
    UnknownTerm(String),

    #[error("term `{0}` is rank deficient after constraints")]
    RankDeficient(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by bad inputs or configuration, as opposed
    /// to numerical or domain failures during model evaluation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Format { .. }
                | Error::Config(_)
                | Error::InvalidArgument(_)
                | Error::MissingBase(_)
                | Error::UnknownTerm(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
