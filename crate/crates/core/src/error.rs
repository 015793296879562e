use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("coincident points: target {target} and source {source_index} at distance zero with unregularized kernel")]
    Coincident { target: usize, source_index: usize },

    #[error("collision between vortices {i} and {j} at t = {t} (distance {distance})")]
    Collision {
        i: usize,
        j: usize,
        t: f64,
        distance: f64,
    },

    #[error("component {0} has zero intensity")]
    ZeroIntensity(usize),

    #[error("component {0} has circulations of mixed sign")]
    MixedSign(usize),

    #[error("component {0} does not exist")]
    NoSuchComponent(usize),

    #[error("total masses differ: {0} vs {1}")]
    MassMismatch(f64, f64),

    #[error("measure carries a negative mass ({0})")]
    NegativeMass(f64),

    #[error("initial data inconsistent: {0}")]
    SpecInconsistency(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sampling pitch unknown for this cloud")]
    PitchUnknown,

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Whether the error stems from invalid input (configuration, files,
    /// initial data) rather than from a failure while computing.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. }
                | Error::Parse { .. }
                | Error::Format { .. }
                | Error::SpecInconsistency(_)
                | Error::MassMismatch(..)
                | Error::NegativeMass(_)
                | Error::MixedSign(_)
                | Error::ZeroIntensity(_)
                | Error::NoSuchComponent(_)
        )
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
