//! Mass conservation of reaction-free runs.

use super::{bump, disk_mesh, interval_mesh, Bound, StudyReport};
use crate::geometry::Mesh;
use crate::models::{builtin_porous_media_linear, builtin_two_population, ModelSpec, TwoPopulationParams};
use crate::solver::{run, ExitStatus, SolverConfig};
use crate::{Error, Field, Result};

/// One reaction-free configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConservationCase {
    IntervalSingle,
    IntervalTwoSpecies,
    DiskSingle,
    DiskTwoSpecies,
}

impl ConservationCase {
    pub const ALL: [ConservationCase; 4] = [
        ConservationCase::IntervalSingle,
        ConservationCase::IntervalTwoSpecies,
        ConservationCase::DiskSingle,
        ConservationCase::DiskTwoSpecies,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ConservationCase::IntervalSingle => "interval_single",
            ConservationCase::IntervalTwoSpecies => "interval_two_species",
            ConservationCase::DiskSingle => "disk_single",
            ConservationCase::DiskTwoSpecies => "disk_two_species",
        }
    }

    fn mesh(&self) -> Result<Mesh> {
        match self {
            ConservationCase::IntervalSingle | ConservationCase::IntervalTwoSpecies => interval_mesh(1.0, 32, 32, 2.0),
            ConservationCase::DiskSingle | ConservationCase::DiskTwoSpecies => disk_mesh(1.5, 24, 12, 12, 1.5),
        }
    }

    fn setup(&self, mesh: &Mesh) -> Result<(ModelSpec, Field)> {
        let b = bump(mesh, 0.2, 10.0);
        match self {
            ConservationCase::IntervalSingle | ConservationCase::DiskSingle => {
                Ok((builtin_porous_media_linear(1.0, 0.0)?, b))
            }
            _ => {
                // Coupled diffusivities, no reaction.
                let params = TwoPopulationParams::constant(0.1, 0.2, [1.0, 1.0, 0.5, 1.0]);
                let model = builtin_two_population(params, &[])?;
                let second: Vec<f64> = b.species(0).iter().map(|v| 1.5 - 0.5 * v).collect();
                Ok((model, Field::from_species(mesh, &[b.species(0), second])?))
            }
        }
    }
}

fn max_relative_drift(mesh: &Mesh, traj: &[(f64, Field)], u0: &Field) -> f64 {
    let m0 = u0.mass(mesh);
    traj.iter()
        .flat_map(|(_, u)| {
            u.mass(mesh)
                .into_iter()
                .zip(m0.clone())
                .map(|(m, m0)| ((m - m0) / m0).abs())
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Relative drift of `sum vol u` for every case and every `(duration, dt)`
/// pair, checked against `tolerance` over all recorded steps.
pub fn conservation_study(cases: &[ConservationCase], runs: &[(f64, f64)], tolerance: f64) -> Result<StudyReport> {
    let mut report = StudyReport::new("conservation");
    report.param("cases", cases.iter().map(|c| c.label()).collect::<Vec<_>>());
    report.param("runs", runs);
    report.param("tolerance", tolerance);
    for case in cases {
        let mesh = case.mesh()?;
        let (model, u0) = case.setup(&mesh)?;
        for &(duration, dt) in runs {
            let out = run(&u0, &model, &mesh, &SolverConfig::fixed(duration, dt), 1)?;
            if !matches!(out.exit, ExitStatus::CompletedBudget { .. }) {
                return Err(Error::EarlyExit(format!("{}: {:?}", case.label(), out.exit)));
            }
            let drift = max_relative_drift(&mesh, &out.trajectory, &u0);
            let tag = format!("{}_T{duration}_dt{dt}", case.label());
            report.measure(format!("drift_{tag}"), drift, Bound::AtMost { limit: tolerance });
            report.measure(format!("steps_{tag}"), out.steps() as f64, Bound::AtLeast { limit: 1.0 });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_runs_conserve_mass() {
        let report = conservation_study(&ConservationCase::ALL, &[(0.05, 0.01), (0.05, 0.001)], 1e-11).unwrap();
        assert!(report.pass, "{:#?}", report.measurements);
    }
}
