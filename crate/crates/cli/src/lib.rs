//! Config parsing, run orchestration and artifact emission for the `degrd`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{load_config, parse_config, RunConfig};
pub use error::{code, CliError};

/// Overrides `output.directory` when set.
pub const OUTPUT_DIR_ENV: &str = "DEGRD_OUTPUT_DIR";

/// Output directory: the environment override if present, else the config value.
pub fn output_dir(config: &RunConfig) -> std::path::PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => dir.into(),
        _ => config.output.directory.clone().into(),
    }
}
