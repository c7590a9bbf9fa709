use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance must be positive and finite, got {0} m")]
    InvalidDistance(f64),

    #[error("link is in outage: no pathloss or gain is defined")]
    OutageLink,

    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("codebook mismatch: {0}")]
    CodebookMismatch(String),

    #[error("config parse error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
