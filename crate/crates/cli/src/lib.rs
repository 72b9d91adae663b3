//! Command-line front end for `polymax`: configuration, subcommands and the
//! acceptance suite.

// NaN-rejecting comparisons are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] polymax::Error),
}

impl RunError {
    /// 2 for anything the caller can fix by changing the configuration, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(polymax::Error::InvalidArgument(_) | polymax::Error::DimensionMismatch { .. } | polymax::Error::Io(_)) => 2,
            RunError::Numeric(_) => 1,
        }
    }
}
