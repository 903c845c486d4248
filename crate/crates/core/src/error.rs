use thiserror::Error;

pub type Result<T> = std::result::Result<T, RankError>;

#[derive(Debug, Error)]
pub enum RankError {
    /// A method defined only for binary outcomes received a categorical tensor.
    #[error("category error: {0}")]
    Category(String),

    #[error("invalid score {value} at index {index}")]
    InvalidScore { index: usize, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported size: {what} = {size} exceeds the exact-solver limit {max}")]
    UnsupportedSize {
        what: &'static str,
        size: usize,
        max: usize,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RankError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        RankError::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        RankError::Config(msg.into())
    }
}
