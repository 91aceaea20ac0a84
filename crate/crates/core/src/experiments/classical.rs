//! Classical finite-difference reference solvers on a uniform grid and the
//! comparison with the degenerate solver. Nothing here goes through the
//! mesh or operator code.

use super::{interval_mesh, Bound, Series, StudyReport};
use crate::geometry::{DomainSpec, Mesh, WeightProfile};
use crate::models::builtin_logistic;
use crate::solver::{run, ExitStatus, SolverConfig};
use crate::{Error, Field, Region, Result};

/// Tridiagonal solve; `lower[0]` and `upper[n-1]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Implicit Euler for `u_t = alpha u_xx` on cell centers `(i + 1/2) h` with
/// homogeneous Neumann ends.
pub fn classical_neumann_heat(u0: &[f64], h: f64, alpha: f64, dt: f64, steps: usize) -> Vec<f64> {
    let n = u0.len();
    let k = dt * alpha / (h * h);
    let lower = vec![-k; n];
    let upper = vec![-k; n];
    let mut diag = vec![1.0 + 2.0 * k; n];
    diag[0] = 1.0 + k;
    diag[n - 1] = 1.0 + k;
    let mut u = u0.to_vec();
    for _ in 0..steps {
        u = thomas(&lower, &diag, &upper, &u);
    }
    u
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalRun {
    /// Grid nodes including both boundary nodes.
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub max_over_time: f64,
    pub min_over_time: f64,
}

/// Linearly implicit scheme for `u_t - alpha u_xx = (lambda - u) u` on
/// `[0, length]` with `u = 0` at both ends, `n` intervals, from `u0` on the
/// interior nodes.
pub fn classical_dirichlet_logistic(
    length: f64,
    n: usize,
    alpha: f64,
    lambda: f64,
    u0: f64,
    dt: f64,
    steps: usize,
) -> ClassicalRun {
    let h = length / n as f64;
    let k = dt * alpha / (h * h);
    let m = n - 1;
    let lower = vec![-k; m];
    let upper = vec![-k; m];
    let mut u = vec![u0; m];
    let mut hi = u0.max(0.0);
    let mut lo = u0.min(0.0);
    for _ in 0..steps {
        let diag: Vec<f64> = u.iter().map(|v| 1.0 + 2.0 * k + dt * (v - lambda)).collect();
        u = thomas(&lower, &diag, &upper, &u);
        hi = u.iter().cloned().fold(hi, f64::max);
        lo = u.iter().cloned().fold(lo, f64::min);
    }
    let mut full = vec![0.0];
    full.extend(u);
    full.push(0.0);
    ClassicalRun {
        x: (0..=n).map(|j| j as f64 * h).collect(),
        u: full,
        max_over_time: hi,
        min_over_time: lo,
    }
}

/// Max-norm difference between the degenerate solver with the flat weight
/// `r == 1` and [`classical_neumann_heat`] on the matching uniform grid of
/// `[0, 2]` with `4 n` cells.
pub fn flat_heat_difference(n: usize, t_final: f64, dt: f64) -> Result<f64> {
    let domain = DomainSpec::interval(2.0, 0.5)?;
    let weight = WeightProfile::flat(0.5)?;
    let mesh = Mesh::build(&domain, &weight, n, 2 * n, 0.5)?;
    let h = 2.0 / (4 * n) as f64;
    let profile = |x: f64| 1.0 + (-20.0 * (x - 0.8).powi(2)).exp() + 0.5 * (3.0 * x).cos().powi(2);
    let mut order: Vec<usize> = (0..mesh.n_cells()).collect();
    order.sort_by(|a, b| mesh.cells[*a].position[0].total_cmp(&mesh.cells[*b].position[0]));
    for (i, &c) in order.iter().enumerate() {
        let x = (i as f64 + 0.5) * h;
        if (mesh.cells[c].position[0] - x).abs() > 1e-12 {
            return Err(Error::MeshQuality(format!("cell {c} is not on the uniform grid")));
        }
    }
    let u0 = Field::from_fn(&mesh, 1, |c, m, _| profile(m.cells[c].position[0]));
    let model = builtin_logistic(1.0, 0.0, 0.0)?;
    let out = run(&u0, &model, &mesh, &SolverConfig::fixed(t_final, dt), usize::MAX)?;
    let steps = out.steps();
    let grid0: Vec<f64> = (0..4 * n).map(|i| profile((i as f64 + 0.5) * h)).collect();
    let reference = classical_neumann_heat(&grid0, h, 1.0, dt, steps);
    Ok(order
        .iter()
        .enumerate()
        .map(|(i, &c)| (out.final_state.u.get(c, 0) - reference[i]).abs())
        .fold(0.0, f64::max))
}

/// [`flat_heat_difference`] as a report, verdict at `tolerance`.
pub fn classical_reduction_study(n: usize, t_final: f64, dt: f64, tolerance: f64) -> Result<StudyReport> {
    let mut report = StudyReport::new("classical_reduction");
    report.param("cells", 4 * n);
    report.param("t_final", t_final);
    report.param("dt", dt);
    let diff = flat_heat_difference(n, t_final, dt)?;
    report.measure("max_difference", diff, Bound::AtMost { limit: tolerance });
    Ok(report)
}

/// Classical Dirichlet logistic against the degenerate logistic, both from
/// `u0 == lambda / 2` with `alpha = a = 1`.
pub fn classical_comparison_study(lambda: f64, t_final: f64) -> Result<StudyReport> {
    if !(lambda > 0.0) {
        return Err(Error::ParameterDomain(format!("lambda must be positive, got {lambda}")));
    }
    let mut report = StudyReport::new("classical_comparison");
    report.param("lambda", lambda);
    report.param("t_final", t_final);
    let dt = 0.01_f64.min(0.5 / lambda);
    let steps = (t_final / dt).round() as usize;
    let classical = classical_dirichlet_logistic(2.0, 200, 1.0, lambda, lambda / 2.0, dt, steps);
    report.measure("classical_max_over_time", classical.max_over_time, Bound::AtMost { limit: lambda + 1e-8 });
    report.measure("classical_min_over_time", classical.min_over_time, Bound::AtLeast { limit: 0.0 });
    report.measure(
        "classical_boundary_fraction",
        classical.u[1] / lambda,
        Bound::AtMost { limit: 0.5 },
    );

    let mesh = interval_mesh(1.0, 32, 32, 3.0)?;
    let model = builtin_logistic(1.0, lambda, 1.0)?;
    let u0 = Field::constant(&mesh, &[lambda / 2.0]);
    let out = run(&u0, &model, &mesh, &SolverConfig::fixed(t_final, 0.05), usize::MAX)?;
    if !matches!(out.exit, ExitStatus::CompletedBudget { .. }) {
        return Err(Error::EarlyExit(format!("degenerate logistic: {:?}", out.exit)));
    }
    let u = &out.final_state.u;
    let interior: Vec<usize> = (0..mesh.n_cells()).filter(|&c| mesh.cells[c].region == Region::Interior).collect();
    let interior_error = interior.iter().map(|&c| (u.get(c, 0) - lambda).abs()).fold(0.0, f64::max);
    let interior_mean = interior.iter().map(|&c| u.get(c, 0)).sum::<f64>() / interior.len() as f64;
    let deep = mesh.collar_rays.iter().map(|ray| u.get(*ray.last().unwrap(), 0)).fold(f64::INFINITY, f64::min);
    report.measure("degenerate_interior_error", interior_error, Bound::AtMost { limit: 1e-2 });
    report.measure(
        "degenerate_deep_layer_gap",
        (deep - interior_mean).abs() / interior_mean,
        Bound::AtMost { limit: 0.1 },
    );
    report.measure("degenerate_deep_layer_fraction", deep / lambda, Bound::Above { limit: 0.5 });

    report.series.push(Series::new(
        "classical_profile",
        "x",
        "u",
        classical.x.iter().cloned().zip(classical.u.iter().cloned()).collect(),
    ));
    let mut degenerate: Vec<(f64, f64)> = (0..mesh.n_cells()).map(|c| (mesh.cells[c].position[0], u.get(c, 0))).collect();
    degenerate.sort_by(|a, b| a.0.total_cmp(&b.0));
    report.series.push(Series::new("degenerate_profile", "x", "u", degenerate));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_tridiagonal_system() {
        let x = thomas(&[0.0, 1.0, 1.0], &[4.0, 4.0, 4.0], &[1.0, 1.0, 0.0], &[5.0, 6.0, 5.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn neumann_heat_conserves_and_relaxes() {
        let u0: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { 0.0 }).collect();
        let u = classical_neumann_heat(&u0, 0.05, 1.0, 0.01, 500);
        assert!((u.iter().sum::<f64>() - 10.0).abs() < 1e-12);
        assert!(u.iter().all(|v| (v - 0.5).abs() < 1e-3));
    }

    #[test]
    fn dirichlet_logistic_respects_bounds() {
        let r = classical_dirichlet_logistic(2.0, 100, 1.0, 2.0, 1.0, 0.01, 1000);
        assert!(r.max_over_time <= 2.0 + 1e-12 && r.min_over_time >= 0.0);
        assert_eq!((r.u[0], r.u[100]), (0.0, 0.0));
    }

    #[test]
    fn flat_weight_reproduces_classical_heat() {
        let diff = flat_heat_difference(8, 0.1, 0.01).unwrap();
        assert!(diff < 1e-10, "difference {diff}");
    }
}
