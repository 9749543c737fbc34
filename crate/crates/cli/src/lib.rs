//! Configuration, recipe dispatch and result files for the `gspin` tool.

pub mod config;
pub mod recipes;
pub mod result;
pub mod synthetic;

pub use config::{config_from_str, load_config, Config};
pub use recipes::{run_experiment, run_recipe, RECIPES};
pub use result::{compare, read_result, write_result, Column, ColumnDeviation, ResultFile};

/// Directory searched for `gspin.toml` when no `--config` is given.
pub const CONFIG_DIR_ENV: &str = "GSPIN_CONFIG_DIR";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error in {0}")]
    Parse(String),
    #[error("invalid {key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("malformed result: {0}")]
    Format(String),
}

impl CliError {
    /// 2 for command-line misuse, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
