//! Snapshot CSVs and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use degrd_core::fields::{fmt_f64, region_tag};
use degrd_core::geometry::FaceKind;
use degrd_core::models::eval_coefficients;
use degrd_core::operators::degenerate_flux;
use degrd_core::solver::StepRecord;
use degrd_core::{ExitStatus, Field, Mesh, ModelSpec};
use serde::Serialize;

use crate::config::{species_names, RunConfig};
use crate::error::CliError;

/// Order in which the exit detectors are evaluated after each step.
pub const DETECTOR_ORDER: [&str; 4] = ["budget", "state_boundary_approach", "norm_threshold", "non_cauchy_tail"];

/// Cell-centred normal flux per species for every collar cell: the mean of
/// the two faces bounding the cell along its ray, oriented towards the
/// boundary. The truncation face contributes zero.
pub fn cell_normal_flux(u: &Field, model: &ModelSpec, mesh: &Mesh) -> Result<Vec<Vec<Option<f64>>>, CliError> {
    let coeffs = eval_coefficients(model, u, mesh)?;
    let mut out = Vec::with_capacity(model.n_species);
    for (i, a) in coeffs.iter().enumerate() {
        let weight = match &model.per_species_s {
            Some(s) => mesh.weight.with_s(s[i])?,
            None => mesh.weight.clone(),
        };
        let flux = degenerate_flux(u, i, a, mesh, &weight)?;
        let mut cell = vec![None; mesh.n_cells()];
        for (c, slot) in cell.iter_mut().enumerate() {
            if mesh.cells[c].collar.is_some() {
                *slot = Some(0.0);
            }
        }
        for (k, f) in mesh.faces.iter().enumerate() {
            let towards_boundary = match f.kind {
                FaceKind::CollarNormal => flux.values[k],
                FaceKind::Seam => -flux.values[k],
                _ => continue,
            };
            for &c in &f.cells {
                if let Some(v) = cell[c].as_mut() {
                    *v += 0.5 * towards_boundary;
                }
            }
        }
        out.push(cell);
    }
    Ok(out)
}

/// `cell,region,q,tau,y,x1[,x2],u1..,flux_u1..`; interior rows leave the
/// collar columns empty.
pub fn snapshot_csv(u: &Field, model: &ModelSpec, mesh: &Mesh) -> Result<String, CliError> {
    let names = species_names(model.n_species);
    let flux = cell_normal_flux(u, model, mesh)?;
    let mut header = vec!["cell".to_string(), "region".into(), "q".into(), "tau".into(), "y".into()];
    header.extend((1..=mesh.dimension()).map(|d| format!("x{d}")));
    header.extend(names.iter().cloned());
    header.extend(names.iter().map(|n| format!("flux_{n}")));
    let mut out = header.join(",");
    out.push('\n');
    for (c, cell) in mesh.cells.iter().enumerate() {
        let _ = write!(out, "{c},{}", region_tag(cell.region));
        match cell.collar {
            Some(cc) => {
                let _ = write!(out, ",{},{},{}", cc.q, fmt_f64(cc.tau), fmt_f64(cc.y));
            }
            None => out.push_str(",,,"),
        }
        for x in &cell.position {
            let _ = write!(out, ",{}", fmt_f64(*x));
        }
        for v in u.cell(c) {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        for species in &flux {
            match species[c] {
                Some(f) => {
                    let _ = write!(out, ",{}", fmt_f64(f));
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub cells: usize,
    pub dimension: usize,
    pub n_collar: usize,
    pub n_interior: usize,
    pub tau_max: f64,
    pub fingerprint: String,
}

impl MeshSummary {
    pub fn of(mesh: &Mesh) -> Self {
        MeshSummary {
            cells: mesh.n_cells(),
            dimension: mesh.dimension(),
            n_collar: mesh.n_collar,
            n_interior: mesh.n_interior,
            tau_max: mesh.tau_max,
            fingerprint: format!("{:016x}", mesh.id()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub step: usize,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorEntry {
    pub class: String,
    pub message: String,
}

/// Everything a run leaves behind besides the snapshot files. The config is
/// echoed as TOML text so infinite state-space bounds survive.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: String,
    pub mesh: Option<MeshSummary>,
    pub species: Vec<String>,
    pub detector_order: Vec<String>,
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<SnapshotEntry>,
    pub exit: Option<ExitStatus>,
    pub error: Option<ErrorEntry>,
    pub exit_code: i32,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            command: command.into(),
            config: config.to_toml(),
            mesh: None,
            species: species_names(config.n_species()),
            detector_order: DETECTOR_ORDER.iter().map(|s| s.to_string()).collect(),
            steps: Vec::new(),
            snapshots: Vec::new(),
            exit: None,
            error: None,
            exit_code: 0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serialization");
        write_file(&dir.join("manifest.json"), &(json + "\n"))
    }
}
