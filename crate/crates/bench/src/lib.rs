//! Shared fixtures for the `degrd` benchmarks.

use degrd_core::{DomainSpec, Field, Mesh, WeightProfile};

/// Interval `[0, 2]` with collar depth 0.5 and `n` cells in each region.
pub fn interval(s: f64, n: usize) -> Mesh {
    let d = DomainSpec::interval(2.0, 0.5).expect("interval");
    Mesh::build(&d, &WeightProfile::new(0.5, s).expect("weight"), n, n, 4.0).expect("mesh")
}

/// Unit disk with collar depth 0.3 and `n` cells per direction.
pub fn disk(s: f64, n: usize) -> Mesh {
    let d = DomainSpec::disk(1.0, 0.3, n).expect("disk");
    Mesh::build(&d, &WeightProfile::new(0.3, s).expect("weight"), n / 2, n / 2, 1.5).expect("mesh")
}

/// Smooth positive field, `0.5 + exp(-4 |x - centre|^2)`.
pub fn smooth(mesh: &Mesh) -> Field {
    let centre = if mesh.dimension() == 1 { 1.0 } else { 0.0 };
    Field::from_fn(mesh, 1, |c, m, _| {
        let r2: f64 = m.cells[c].position.iter().map(|x| (x - centre) * (x - centre)).sum();
        0.5 + (-4.0 * r2).exp()
    })
}
