use thiserror::Error;

/// Errors produced by the receiver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hypothesis index {0} out of range 0..4")]
    InvalidSymbol(usize),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("degenerate beam split: {0}")]
    DegenerateSplit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("enumeration over {stages} stages exceeds the configured bound of {max} (2^{max} histories)")]
    TooManyStages { stages: usize, max: usize },

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("at {context}: {source}")]
    AtGridPoint { context: String, source: Box<Error> },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: format!("{value} is not in [0, 1]"),
        })
    }
}

pub(crate) fn check_non_negative(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            field,
            reason: format!("{value} is not a finite non-negative number"),
        })
    }
}
