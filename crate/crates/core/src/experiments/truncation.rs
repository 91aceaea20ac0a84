//! Sensitivity of interior states to the collar truncation depth.

use super::{interval_mesh, Bound, Series, StudyReport};
use crate::geometry::Mesh;
use crate::models::builtin_logistic;
use crate::solver::{run, SolverConfig};
use crate::{Error, Field, Region, Result};

/// Collar cells per unit of `tau`, so every depth shares the same spacing.
const CELLS_PER_TAU: f64 = 16.0;

fn interior_state(tau_max: f64, t_final: f64, dt: f64) -> Result<Vec<f64>> {
    let n_collar = (tau_max * CELLS_PER_TAU).round() as usize;
    let mesh: Mesh = interval_mesh(1.0, n_collar, 32, tau_max)?;
    let u0 = Field::from_fn(&mesh, 1, |c, m, _| {
        let x = m.cells[c].position[0];
        0.1 + (-40.0 * (x - 1.0).powi(2)).exp()
    });
    let heat = builtin_logistic(1.0, 0.0, 0.0)?;
    let out = run(&u0, &heat, &mesh, &SolverConfig::fixed(t_final, dt), usize::MAX)?;
    Ok((0..mesh.n_cells())
        .filter(|&c| mesh.cells[c].region == Region::Interior)
        .map(|c| out.final_state.u.get(c, 0))
        .collect())
}

/// Pure diffusion of an interior bump for every `tau_max`, compared in the
/// max norm on interior cells against `reference_tau_max`. Requires the
/// differences to decrease monotonically and the smallest to be below
/// `tolerance`.
pub fn truncation_study(
    tau_values: &[f64],
    reference_tau_max: f64,
    t_final: f64,
    dt: f64,
    tolerance: f64,
) -> Result<StudyReport> {
    if tau_values.len() < 3 {
        return Err(Error::TooFewSamples(tau_values.len()));
    }
    let mut report = StudyReport::new("truncation");
    report.param("tau_values", tau_values);
    report.param("reference_tau_max", reference_tau_max);
    report.param("t_final", t_final);
    report.param("dt", dt);
    let reference = interior_state(reference_tau_max, t_final, dt)?;
    let mut diffs = Vec::new();
    for &tau in tau_values {
        let u = interior_state(tau, t_final, dt)?;
        let d = u.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report.measure(format!("difference_tau{tau}"), d, Bound::AtLeast { limit: 0.0 });
        diffs.push(d);
    }
    for (k, w) in diffs.windows(2).enumerate() {
        let name = format!("decrease_tau{}_to_tau{}", tau_values[k], tau_values[k + 1]);
        report.measure(name, w[0] - w[1], Bound::Above { limit: 0.0 });
    }
    let smallest = diffs.iter().cloned().fold(f64::INFINITY, f64::min);
    report.measure("smallest_difference", smallest, Bound::AtMost { limit: tolerance });
    report.series.push(Series::new(
        "truncation_differences",
        "tau_max",
        "difference",
        tau_values.iter().cloned().zip(diffs).collect(),
    ));
    Ok(report)
}
