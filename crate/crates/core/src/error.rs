use thiserror::Error;

/// Errors raised by the core simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("mesh quality: {0}")]
    MeshQuality(String),

    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),

    #[error("field does not belong to this mesh (expected {expected} cells, got {got})")]
    MeshMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field contains non-finite values")]
    InvalidField,

    #[error("nonpositive diffusion coefficient {value} at cell {cell}")]
    NonpositiveCoefficient { cell: usize, value: f64 },

    #[error("state {value} of species {species} at cell {cell} lies outside the state space")]
    StateOutsideX {
        cell: usize,
        species: usize,
        value: f64,
    },

    #[error("inadmissible initial data: {0}")]
    InadmissibleInitialData(String),

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("time step collapsed at t = {t} (dt = {dt})")]
    StepCollapse { t: f64, dt: f64 },

    #[error("trajectory needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("run ended before the requested time: {0}")]
    EarlyExit(String),

    #[error("io error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag for manifests and exit codes.
    pub fn class(&self) -> &'static str {
        match self {
            Error::ParameterDomain(_) => "parameter_domain",
            Error::MeshQuality(_) => "mesh_quality",
            Error::MeshTooCoarse(_) => "mesh_too_coarse",
            Error::MeshMismatch { .. } => "mesh_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidField => "invalid_field",
            Error::NonpositiveCoefficient { .. } => "nonpositive_coefficient",
            Error::StateOutsideX { .. } => "state_outside_x",
            Error::InadmissibleInitialData(_) => "inadmissible_initial_data",
            Error::LinearSolver(_) => "linear_solver",
            Error::StepCollapse { .. } => "step_collapse",
            Error::TooFewSamples(_) => "too_few_samples",
            Error::EarlyExit(_) => "early_exit",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
