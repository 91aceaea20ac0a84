//! Collar chart, boundary weight and the finite-volume mesh.

mod domain;
mod mesh;
mod weight;

pub use domain::{collar_chart, BoundaryPoint, ChartPoint, DomainKind, DomainSpec};
pub use mesh::{Block, Cell, CollarCoords, Face, FaceKind, Mesh, Region, TruncationFace};
pub use weight::{WeightKind, WeightProfile};

/// Builds the weight profile for collar depth `epsilon` and exponent `s`.
pub fn build_weight_profile(epsilon: f64, s: f64) -> crate::Result<WeightProfile> {
    WeightProfile::new(epsilon, s)
}

/// Builds the collar/interior mesh; see [`Mesh::build`].
pub fn build_mesh(
    domain: &DomainSpec,
    weight: &WeightProfile,
    n_collar: usize,
    n_interior: usize,
    tau_max: f64,
) -> crate::Result<Mesh> {
    Mesh::build(domain, weight, n_collar, n_interior, tau_max)
}
