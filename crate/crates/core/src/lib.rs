//! Finite-volume simulator for quasilinear reaction-diffusion systems whose
//! diffusive flux degenerates at the boundary like `rho^s`.
//!
//! The collar along the boundary is discretized in the stretched coordinate
//! `tau` (where the operator is uniformly elliptic), the interior in ordinary
//! Cartesian or polar cells. Time stepping is linearly implicit with coefficients
//! frozen at the previous state.

mod error;

pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use fields::{Field, NormReport, StateSpaceX};
pub use geometry::{DomainKind, DomainSpec, Mesh, Region, WeightProfile};
pub use models::ModelSpec;
pub use operators::OperatorMatrix;
pub use solver::{ExitStatus, SimulationState, SolverConfig};
