use thiserror::Error;

/// Errors raised across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("capacity exceeded for {what}: requested {requested}, maximum {maximum}")]
    Capacity {
        what: &'static str,
        requested: usize,
        maximum: usize,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("undefined fidelity: {0}")]
    UndefinedFidelity(&'static str),
    #[error("evaluator failed at iteration {iteration}: {source}")]
    Evaluation {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim(msg: impl Into<String>) -> Error {
    Error::Dimension(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidValue(msg.into())
}
