//! Scripted studies that turn qualitative properties of the degenerate
//! problem into measured quantities with declared tolerances.
//!
//! Every study returns a [`StudyReport`]; verdicts are recomputed from the
//! measured values alone, so a report read back from disk gives the same
//! pass/fail answer.

mod classical;
mod conservation;
mod exits;
mod flux;
mod kernel;
mod truncation;

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fields::fmt_f64;
use crate::geometry::{DomainSpec, Mesh, WeightProfile};
use crate::{Error, Result};

pub use classical::{
    classical_comparison_study, classical_dirichlet_logistic, classical_reduction_study, classical_neumann_heat, flat_heat_difference,
    ClassicalRun,
};
pub use conservation::{conservation_study, ConservationCase};
pub use exits::exit_alternative_study;
pub use flux::{fit_loglog_slope, flux_decay_study, FluxStudyParams};
pub use kernel::{kernel_residual_study, KernelResiduals};
pub use truncation::truncation_study;

/// Acceptance rule for one measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    /// Strictly greater than `limit`.
    Above { limit: f64 },
    Within { low: f64, high: f64 },
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost { limit } => v <= limit,
            Bound::AtLeast { limit } => v >= limit,
            Bound::Above { limit } => v > limit,
            Bound::Within { low, high } => v >= low && v <= high,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Bound::AtMost { .. } => "at_most",
            Bound::AtLeast { .. } => "at_least",
            Bound::Above { .. } => "above",
            Bound::Within { .. } => "within",
        }
    }

    fn limits(&self) -> (f64, f64) {
        match *self {
            Bound::AtMost { limit } | Bound::AtLeast { limit } | Bound::Above { limit } => (limit, limit),
            Bound::Within { low, high } => (low, high),
        }
    }

    fn from_parts(kind: &str, low: f64, high: f64) -> Option<Bound> {
        Some(match kind {
            "at_most" => Bound::AtMost { limit: low },
            "at_least" => Bound::AtLeast { limit: low },
            "above" => Bound::Above { limit: low },
            "within" => Bound::Within { low, high },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Measurement {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        Measurement {
            name: name.into(),
            value,
            pass: bound.holds(value),
            bound,
        }
    }
}

/// Plot-ready `(x, y)` data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub name: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub measurements: Vec<Measurement>,
    #[serde(skip)]
    pub series: Vec<Series>,
    pub pass: bool,
}

impl StudyReport {
    pub fn new(name: &str) -> Self {
        StudyReport {
            name: name.into(),
            parameters: BTreeMap::new(),
            measurements: Vec::new(),
            series: Vec::new(),
            pass: true,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("parameter serialization");
        self.parameters.insert(key.into(), value);
    }

    pub fn measure(&mut self, name: impl Into<String>, value: f64, bound: Bound) -> bool {
        let m = Measurement::new(name, value, bound);
        let pass = m.pass;
        self.measurements.push(m);
        self.pass = verdict(&self.measurements);
        pass
    }

    pub fn measurement(&self, name: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.name == name)
    }

    /// Writes `report.json`, `measurements.csv` and one CSV per series.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = serde_json::to_string_pretty(self).expect("report serialization");
        let path = dir.join("report.json");
        fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
        let path = dir.join("measurements.csv");
        let mut out = Vec::new();
        write_measurements(&self.measurements, &mut out).map_err(|e| Error::io(&path, e))?;
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        for s in &self.series {
            let path = dir.join(format!("{}.csv", s.name));
            let mut out = format!("{},{}\n", s.x_label, s.y_label);
            for (x, y) in &s.points {
                out.push_str(&format!("{},{}\n", fmt_f64(*x), fmt_f64(*y)));
            }
            fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// A study passes when all of its measurements do.
pub fn verdict(measurements: &[Measurement]) -> bool {
    measurements.iter().all(|m| m.bound.holds(m.value))
}

pub fn write_measurements<W: Write>(ms: &[Measurement], mut out: W) -> std::io::Result<()> {
    writeln!(out, "name,value,bound,low,high,pass")?;
    for m in ms {
        let (low, high) = m.bound.limits();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            m.name,
            fmt_f64(m.value),
            m.bound.kind(),
            fmt_f64(low),
            fmt_f64(high),
            m.pass
        )?;
    }
    Ok(())
}

/// Reads a measurements CSV back, recomputing each `pass` from value and bound.
pub fn read_measurements(path: &Path) -> Result<Vec<Measurement>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line.map_err(|e| Error::io(path, e))?;
        let parts: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::io(path, format!("line {}: {e}", k + 1)));
        if parts.len() != 6 {
            return Err(Error::io(path, format!("line {}: expected 6 columns", k + 1)));
        }
        let bound = Bound::from_parts(parts[2], parse(parts[3])?, parse(parts[4])?)
            .ok_or_else(|| Error::io(path, format!("line {}: unknown bound {}", k + 1, parts[2])))?;
        out.push(Measurement::new(parts[0], parse(parts[1])?, bound));
    }
    Ok(out)
}

/// Interval `[0, 2]` with collar depth 0.5.
pub(crate) fn interval_mesh(s: f64, n_collar: usize, n_interior: usize, tau_max: f64) -> Result<Mesh> {
    let domain = DomainSpec::interval(2.0, 0.5)?;
    let weight = WeightProfile::new(0.5, s)?;
    Mesh::build(&domain, &weight, n_collar, n_interior, tau_max)
}

/// Unit disk with collar depth 0.3.
pub(crate) fn disk_mesh(s: f64, n_theta: usize, n_collar: usize, n_interior: usize, tau_max: f64) -> Result<Mesh> {
    let domain = DomainSpec::disk(1.0, 0.3, n_theta)?;
    let weight = WeightProfile::new(0.3, s)?;
    Mesh::build(&domain, &weight, n_collar, n_interior, tau_max)
}

/// `base + exp(-width |x - center|^2)`, centered at the middle of the domain.
pub(crate) fn bump(mesh: &Mesh, base: f64, width: f64) -> crate::Field {
    let center = match mesh.dimension() {
        1 => vec![mesh.domain.extent / 2.0],
        _ => vec![0.0, 0.0],
    };
    crate::Field::from_fn(mesh, 1, |c, m, _| {
        let d2: f64 = m.cells[c].position.iter().zip(&center).map(|(x, c)| (x - c).powi(2)).sum();
        base + (-width * d2).exp()
    })
}
