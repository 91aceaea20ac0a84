//! The `run`, `study`, `validate` and `norms` verbs.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use degrd_core::experiments::{
    classical_comparison_study, classical_reduction_study, conservation_study, exit_alternative_study,
    flux_decay_study, kernel_residual_study, truncation_study, ConservationCase, FluxStudyParams, StudyReport,
};
use degrd_core::solver::run;
use degrd_core::{ExitStatus, Field, Mesh, NormReport};
use serde::Serialize;

use crate::config::{species_names, InitialKind, RunConfig};
use crate::error::{code, CliError};
use crate::output::{snapshot_csv, ErrorEntry, Manifest, MeshSummary, SnapshotEntry};

pub const STUDIES: [&str; 7] = [
    "kernel_residuals",
    "flux_decay",
    "conservation",
    "classical_reduction",
    "classical_comparison",
    "truncation",
    "exit_alternatives",
];

pub fn exit_code_for(status: &ExitStatus) -> i32 {
    match status {
        ExitStatus::CompletedBudget { .. } => code::OK,
        ExitStatus::StateBoundaryApproach { .. } => code::STATE_BOUNDARY,
        ExitStatus::NormDivergence { .. } => code::NORM_DIVERGENCE,
        ExitStatus::StepCollapse { .. } => code::STEP_COLLAPSE,
    }
}

pub fn initial_field(config: &RunConfig, mesh: &Mesh) -> Result<Field, CliError> {
    let n = config.n_species();
    let init = &config.initial;
    let centre = match mesh.dimension() {
        1 => vec![mesh.domain.extent / 2.0],
        _ => vec![0.0, 0.0],
    };
    Ok(match init.kind {
        InitialKind::Constant => Field::constant(mesh, &init.values),
        InitialKind::Bump => Field::from_fn(mesh, n, |c, m, i| {
            let d2: f64 = m.cells[c].position.iter().zip(&centre).map(|(x, c)| (x - c).powi(2)).sum();
            init.values[i] + init.amplitude * (-init.width * d2).exp()
        }),
        InitialKind::Csv => {
            let path = Path::new(init.path.as_deref().unwrap_or_default());
            let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            Field::read_csv(mesh, &species_names(n), BufReader::new(file)).map_err(|e| match e {
                degrd_core::Error::Io { message, .. } => CliError::io(path, message),
                other => other.into(),
            })?
        }
    })
}

fn simulate(config: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<ExitStatus, CliError> {
    let mesh = config.build_mesh()?;
    manifest.mesh = Some(MeshSummary::of(&mesh));
    let model = config.build_model()?;
    let u0 = initial_field(config, &mesh)?;
    let stride = config.output.snapshot_stride;
    let out = run(&u0, &model, &mesh, &config.solver.to_solver_config(), stride)?;
    let snapshots = config.output.formats.iter().any(|f| f == "csv");
    for (k, (t, u)) in out.trajectory.iter().enumerate() {
        let file = format!("snapshots/snapshot_{k:05}.csv");
        if snapshots {
            crate::output::write_file(&dir.join(&file), &snapshot_csv(u, &model, &mesh)?)?;
        }
        manifest.snapshots.push(SnapshotEntry {
            file,
            step: k * stride,
            t: *t,
        });
    }
    manifest.steps = out.log;
    manifest.exit = Some(out.exit.clone());
    Ok(out.exit)
}

/// Runs the simulation described by `config` into `dir` and returns the
/// process exit code. Failures after the config was accepted are recorded
/// in the manifest.
pub fn run_command(config: &RunConfig, dir: &Path) -> Result<i32, CliError> {
    let mut manifest = Manifest::new("run", config);
    let code = match simulate(config, dir, &mut manifest) {
        Ok(exit) => {
            println!("{}", serde_json::to_string(&exit).expect("exit serialization"));
            exit_code_for(&exit)
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            manifest.error = Some(ErrorEntry {
                class: e.class().into(),
                message: e.to_string(),
            });
            e.exit_code()
        }
    };
    manifest.exit_code = code;
    manifest.write(dir)?;
    Ok(code)
}

/// Runs one named study with the overrides of the `[study]` section.
pub fn study_report(name: &str, config: &RunConfig) -> Result<StudyReport, CliError> {
    let st = &config.study;
    let report = match name {
        "kernel_residuals" => {
            let s = st.s_values.clone().unwrap_or(vec![1.0, 1.5, 2.0]);
            let n = st.n_collar.clone().unwrap_or(vec![64, 128, 256]);
            kernel_residual_study(&s, &n)?.0
        }
        "flux_decay" => {
            let mut params = FluxStudyParams::default();
            if let Some(t) = st.t_final {
                params.t_final = t;
            }
            if let Some(dt) = st.dt {
                params.dt = dt;
            }
            if let Some(n) = st.n_collar.as_ref().and_then(|n| n.first()) {
                params.n_collar = *n;
            }
            flux_decay_study(&st.s_values.clone().unwrap_or(vec![1.0, 2.0]), &params)?
        }
        "conservation" => {
            let t = st.t_final.unwrap_or(1.0);
            let runs = match st.dt {
                Some(dt) => vec![(t, dt)],
                None => vec![(t, 1e-3), (t, 1e-2)],
            };
            conservation_study(&ConservationCase::ALL, &runs, st.tolerance.unwrap_or(1e-10))?
        }
        "classical_reduction" => classical_reduction_study(
            st.n_collar.as_ref().and_then(|n| n.first()).copied().unwrap_or(32),
            st.t_final.unwrap_or(0.5),
            st.dt.unwrap_or(1e-3),
            st.tolerance.unwrap_or(1e-8),
        )?,
        "classical_comparison" => classical_comparison_study(st.lambda.unwrap_or(4.0), st.t_final.unwrap_or(20.0))?,
        "truncation" => truncation_study(
            &st.tau_values.clone().unwrap_or(vec![2.0, 4.0, 8.0]),
            st.reference_tau_max.unwrap_or(16.0),
            st.t_final.unwrap_or(2.0),
            st.dt.unwrap_or(0.01),
            st.tolerance.unwrap_or(1e-4),
        )?,
        "exit_alternatives" => exit_alternative_study()?,
        other => return Err(CliError::UnknownStudy(other.into(), STUDIES.join(", "))),
    };
    Ok(report)
}

/// Writes the report under `dir/<name>` and prints one line per measurement.
pub fn study_command(name: &str, config: &RunConfig, dir: &Path) -> Result<i32, CliError> {
    let report = study_report(name, config)?;
    let target = dir.join(name);
    report.write_to(&target).map_err(|e| match e {
        degrd_core::Error::Io { path, message } => CliError::Io { path, message },
        other => other.into(),
    })?;
    for m in &report.measurements {
        println!("{} {} = {:e} ({:?})", if m.pass { "PASS" } else { "FAIL" }, m.name, m.value, m.bound);
    }
    Ok(if report.pass { code::OK } else { code::STUDY_FAILED })
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotNorms {
    pub combined: NormReport,
    pub species: Vec<(String, NormReport)>,
}

/// Norms of the species columns of a snapshot CSV on the mesh of `config`.
pub fn snapshot_norms(path: &Path, config: &RunConfig) -> Result<SnapshotNorms, CliError> {
    let mesh = config.build_mesh()?;
    let names = species_names(config.n_species());
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let u = Field::read_csv(&mesh, &names, BufReader::new(file)).map_err(|e| match e {
        degrd_core::Error::Io { message, .. } => CliError::io(path, message),
        other => other.into(),
    })?;
    let p = config.solver.p;
    let mut species = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let single = Field::from_species(&mesh, &[u.species(i)])?;
        species.push((name.clone(), NormReport::compute(&single, &mesh, p)?));
    }
    Ok(SnapshotNorms {
        combined: NormReport::compute(&u, &mesh, p)?,
        species,
    })
}
