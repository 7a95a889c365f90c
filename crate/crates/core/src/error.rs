use std::io;

use thiserror::Error;

/// Errors produced by the numerical laboratory.
///
/// The variants are coarse on purpose: front ends map each one onto a
/// process exit code (parameter, resource, data, unreliable numerics).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("resource limit: {message} (advisory segment size {advisory_segment})")]
    Resource {
        message: String,
        advisory_segment: usize,
    },

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient zeros: tail bound {bound:.3e} exceeds tolerance {tolerance:.3e}")]
    InsufficientZeros { bound: f64, tolerance: f64 },

    #[error("unreliable numerics: {0}")]
    Unreliable(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource {
            message: msg.into(),
            advisory_segment: crate::sieve::DEFAULT_SEGMENT,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
