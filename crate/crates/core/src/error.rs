use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is outside its legal range.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    /// The configuration document could not be parsed.
    #[error("config parse error: {0}")]
    Parse(String),

    #[error(
        "invalid class fractions: advanced ({advanced}) + intermediate ({intermediate}) exceeds 1"
    )]
    InvalidFraction { advanced: f64, intermediate: f64 },

    #[error("aggregation needs at least one signal")]
    NoSignals,

    #[error("degenerate network: average energy is {0}")]
    DegenerateNetwork(f64),

    #[error("metrics series is empty")]
    EmptySeries,

    #[error("unknown protocol `{0}` (valid: leach, sep, esep, deec, hsep, all)")]
    UnknownProtocol(String),

    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    /// A simulation invariant was broken; indicates a bug rather than bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. }
            | Error::Parse(_)
            | Error::InvalidFraction { .. }
            | Error::UnknownProtocol(_) => 2,
            Error::Io(_) | Error::Csv { .. } => 3,
            Error::NoSignals
            | Error::DegenerateNetwork(_)
            | Error::EmptySeries
            | Error::Invariant(_) => 4,
        }
    }
}
