//! Decay of the normal flux towards the boundary, and the absence of such
//! decay for tangential flux.

use super::{disk_mesh, interval_mesh, Bound, Series, StudyReport};
use crate::geometry::Mesh;
use crate::models::{builtin_logistic, eval_coefficients};
use crate::operators::{normal_flux_profile, tangential_flux_profile};
use crate::solver::{run, ExitStatus, SolverConfig};
use crate::{Error, Field, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FluxStudyParams {
    /// Depth of the deepest collar layer; sets `tau_max` per `s`.
    pub y_deep: f64,
    pub n_collar: usize,
    pub n_interior: usize,
    pub t_final: f64,
    pub dt: f64,
}

impl Default for FluxStudyParams {
    fn default() -> Self {
        FluxStudyParams {
            y_deep: 0.02,
            n_collar: 512,
            n_interior: 64,
            t_final: 0.5,
            dt: 0.01,
        }
    }
}

/// Least-squares slope of `log flux` against `log y` over points with
/// `y <= y_max`, skipping the two deepest layers. `profile` runs from the
/// seam towards the boundary.
pub fn fit_loglog_slope(profile: &[(f64, f64)], y_max: f64) -> Result<f64> {
    let keep = profile.len().saturating_sub(2);
    let pts: Vec<(f64, f64)> = profile[..keep]
        .iter()
        .filter(|(y, f)| *y <= y_max && *f > 0.0)
        .map(|(y, f)| (y.ln(), f.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewSamples(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Slope tolerance for the `u = tau` probe field.
fn probe_tolerance(s: f64) -> f64 {
    if s >= 2.0 {
        0.3
    } else {
        0.2
    }
}

fn collar_y(mesh: &Mesh, c: usize) -> f64 {
    mesh.cells[c].collar.map(|cc| cc.y).unwrap_or(mesh.weight.epsilon())
}

/// For each `s`: a logistic relaxation (`lambda = a = 1`) from data linear in
/// the boundary distance, followed by a log-log fit of the maximal normal flux
/// in the exact-distance zone; the `u = tau` field gives the reference slope
/// `s`. A disk run with angular data checks that tangential flux keeps its size
/// from layer to layer.
pub fn flux_decay_study(s_values: &[f64], params: &FluxStudyParams) -> Result<StudyReport> {
    let mut report = StudyReport::new("flux_decay");
    report.param("s_values", s_values);
    report.param("y_deep", params.y_deep);
    report.param("n_collar", params.n_collar);
    report.param("n_interior", params.n_interior);
    report.param("t_final", params.t_final);
    report.param("dt", params.dt);
    let model = builtin_logistic(1.0, 1.0, 1.0)?;
    let config = SolverConfig::fixed(params.t_final, params.dt);
    let mut previous: Option<f64> = None;
    for &s in s_values {
        let weight = crate::geometry::WeightProfile::new(0.5, s)?;
        let tau_max = weight.tau_of_y(params.y_deep);
        let mesh = interval_mesh(s, params.n_collar, params.n_interior, tau_max)?;
        let eps = mesh.weight.epsilon();
        let u0 = Field::from_fn(&mesh, 1, |c, m, _| 0.5 + 0.5 * collar_y(m, c) / eps);
        let out = run(&u0, &model, &mesh, &config, usize::MAX)?;
        if !matches!(out.exit, ExitStatus::CompletedBudget { .. }) {
            return Err(Error::EarlyExit(format!("flux run for s = {s}: {:?}", out.exit)));
        }
        let u = &out.final_state.u;
        let a = eval_coefficients(&model, u, &mesh)?;
        let profile = normal_flux_profile(u, 0, &a[0], &mesh, &mesh.weight)?;
        let slope = fit_loglog_slope(&profile, eps / 3.0)?;
        report.measure(format!("run_slope_s{s}"), slope, Bound::AtLeast { limit: s - 0.2 });
        if let Some(prev) = previous {
            report.measure(format!("slope_increase_to_s{s}"), slope - prev, Bound::Above { limit: 0.0 });
        }
        previous = Some(slope);

        let tau_field = Field::from_fn(&mesh, 1, |c, m, _| m.cells[c].collar.map(|cc| cc.tau).unwrap_or(0.0));
        let ones = vec![1.0; mesh.n_cells()];
        let probe = normal_flux_profile(&tau_field, 0, &ones, &mesh, &mesh.weight)?;
        let probe_slope = fit_loglog_slope(&probe, eps / 3.0)?;
        let tol = probe_tolerance(s);
        report.measure(
            format!("probe_slope_s{s}"),
            probe_slope,
            Bound::Within { low: s - tol, high: s + tol },
        );
        report.series.push(Series::new(format!("normal_flux_s{s}"), "y", "flux", profile));
        report.series.push(Series::new(format!("probe_flux_s{s}"), "y", "flux", probe));
    }

    let mesh = disk_mesh(1.0, 32, 16, 16, 2.0)?;
    let u0 = Field::from_fn(&mesh, 1, |c, m, _| {
        let x = &m.cells[c].position;
        0.5 + 0.2 * x[1].atan2(x[0]).cos()
    });
    let out = run(&u0, &model, &mesh, &SolverConfig::fixed(0.2, 0.01), usize::MAX)?;
    let u = &out.final_state.u;
    let a = eval_coefficients(&model, u, &mesh)?;
    let tangential = tangential_flux_profile(u, 0, &a[0], &mesh, &mesh.weight)?;
    let ratios: Vec<f64> = tangential.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    report.measure("tangential_ratio_min", lo, Bound::Within { low: 0.5, high: 2.0 });
    report.measure("tangential_ratio_max", hi, Bound::Within { low: 0.5, high: 2.0 });
    report.series.push(Series::new("tangential_flux_disk", "y", "flux", tangential));
    Ok(report)
}
