use thiserror::Error;

use crate::netmodel::RequestKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of its allowed domain.
    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A JSON document did not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// The instance itself is inconsistent (missing ask, unknown host, ...).
    #[error("instance error: {0}")]
    Instance(String),

    /// A plan references entities that do not exist in the instance.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("instance exceeds exact-solver limits: {what} = {actual} > {limit}")]
    SizeLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown agent: {0}")]
    UnknownAgent(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("request {0} has no ask from its assigned seller")]
    MissingAsk(RequestKey),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Schema(err.to_string())
    }
}
