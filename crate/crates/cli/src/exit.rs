//! Failure classes and their process exit codes.

use thiserror::Error;
use wgl_core::Error as CoreError;

pub const OK: i32 = 0;
pub const PARAMETER: i32 = 2;
pub const RESOURCE: i32 = 3;
pub const DATA: i32 = 4;
pub const UNRELIABLE: i32 = 5;
/// Anything that does not fit a class above.
pub const INTERNAL: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// Bad or missing configuration, including a missing zeros file.
    #[error("{0}")]
    Config(String),
    /// Another run holds the output directory.
    #[error("{0}")]
    Busy(String),
    /// Results were written but failed their own accuracy checks.
    #[error("{0}")]
    Unreliable(String),
}

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Parameter(_) | CoreError::Domain(_) => PARAMETER,
        CoreError::Resource { .. } | CoreError::Io(_) => RESOURCE,
        CoreError::Format { .. } | CoreError::Data(_) | CoreError::InsufficientZeros { .. } => DATA,
        CoreError::Unreliable(_) => UNRELIABLE,
    }
}

/// Exit code for the first classifiable error in the chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_code(e);
        }
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Usage(_) | CliError::Config(_) => PARAMETER,
                CliError::Busy(_) => RESOURCE,
                CliError::Unreliable(_) => UNRELIABLE,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return RESOURCE;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return DATA;
        }
    }
    INTERNAL
}
