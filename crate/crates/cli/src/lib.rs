//! Configuration, pipelines and artifact emission for the `tunnel` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod pipelines;
pub mod validate;

use std::path::PathBuf;

use tunnel_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 I/O, 2 configuration, 3 failed check, 4 numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::Input(_) | CoreError::Regime(_) | CoreError::Boundary(_) | CoreError::Config(_) => 2,
                CoreError::Overflow { .. } | CoreError::Quadrature { .. } | CoreError::Analysis(_) => 4,
            },
            CliError::Validation(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}
