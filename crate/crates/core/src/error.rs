use thiserror::Error;

#[derive(Debug, Error)]
pub enum GtdError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("mode {mode} out of range for tensor of order {order}")]
    Mode { mode: usize, order: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GtdError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        GtdError::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GtdError::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, GtdError>;
