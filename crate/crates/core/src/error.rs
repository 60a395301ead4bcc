use thiserror::Error;

/// Errors raised while building or validating a model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("negative timestamp {0} s")]
    NegativeTime(f64),

    #[error("{list} out of order at index {index}")]
    Unordered { list: &'static str, index: usize },

    #[error("event at {at} outside timeline horizon {duration}")]
    OutOfHorizon { at: String, duration: String },

    #[error("timeline durations differ ({0} vs {1})")]
    DurationMismatch(String, String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("decision error rates need calibrated distributions: {0}")]
    Uncalibrated(String),

    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
