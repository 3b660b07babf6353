//! Library half of the `tyc` binary: configuration, commands and output formats.

pub mod commands;
pub mod config;
pub mod output;

use tyc_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

/// Bad input maps to 1, numerical failure to 2.
pub fn core_exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidParameter { .. }
        | CoreError::InvalidConfig(_)
        | CoreError::ModelMismatch(_)
        | CoreError::LengthMismatch { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}
