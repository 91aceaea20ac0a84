use std::path::Path;

use thiserror::Error;

/// Process exit codes.
pub mod code {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const STUDY_FAILED: i32 = 4;
    pub const NUMERICAL: i32 = 5;
    pub const STATE_BOUNDARY: i32 = 10;
    pub const NORM_DIVERGENCE: i32 = 11;
    pub const STEP_COLLAPSE: i32 = 12;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),

    #[error("unknown study {0:?}; expected one of {1}")]
    UnknownStudy(String, String),

    #[error("io error at {path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Core(#[from] degrd_core::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    /// Machine-readable tag written to manifests.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "config_parse",
            CliError::Invalid(_) => "config_invalid",
            CliError::UnknownStudy(..) => "unknown_study",
            CliError::Io { .. } => "io",
            CliError::Core(e) => e.class(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use degrd_core::Error as E;
        match self {
            CliError::Parse(_) | CliError::Invalid(_) | CliError::UnknownStudy(..) => code::CONFIG,
            CliError::Io { .. } | CliError::Core(E::Io { .. }) => code::IO,
            CliError::Core(E::ParameterDomain(_) | E::MeshQuality(_) | E::MeshTooCoarse(_)) => code::CONFIG,
            CliError::Core(_) => code::NUMERICAL,
        }
    }
}
