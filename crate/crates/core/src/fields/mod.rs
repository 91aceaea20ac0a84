//! Per-cell species fields, the admissible state box and weighted norms.

pub mod norms;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::geometry::{Mesh, Region};
use crate::{Error, Result};

pub use norms::{
    bc_components, bc_norm, deep_layer_fraction, trajectory_norm, weighted_lp_norm,
    weighted_sobolev_norm, BcComponents, NormReport,
};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Cell-major values of `n_species` unknowns on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh_id: u64,
    n_species: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(mesh: &Mesh, n_species: usize) -> Self {
        Field {
            mesh_id: mesh.id(),
            n_species,
            values: vec![0.0; mesh.n_cells() * n_species],
        }
    }

    pub fn constant(mesh: &Mesh, per_species: &[f64]) -> Self {
        Self::from_fn(mesh, per_species.len(), |_, _, i| per_species[i])
    }

    /// `f(cell index, mesh, species)`.
    pub fn from_fn(mesh: &Mesh, n_species: usize, mut f: impl FnMut(usize, &Mesh, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(mesh.n_cells() * n_species);
        for c in 0..mesh.n_cells() {
            for i in 0..n_species {
                values.push(f(c, mesh, i));
            }
        }
        Field {
            mesh_id: mesh.id(),
            n_species,
            values,
        }
    }

    pub fn from_values(mesh: &Mesh, n_species: usize, values: Vec<f64>) -> Result<Self> {
        if n_species == 0 || values.len() != mesh.n_cells() * n_species {
            return Err(Error::DimensionMismatch {
                expected: mesh.n_cells() * n_species.max(1),
                got: values.len(),
            });
        }
        Ok(Field {
            mesh_id: mesh.id(),
            n_species,
            values,
        })
    }

    /// Assembles a field from per-species cell vectors.
    pub fn from_species(mesh: &Mesh, species: &[Vec<f64>]) -> Result<Self> {
        let n = mesh.n_cells();
        for s in species {
            if s.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.len() });
            }
        }
        Ok(Self::from_fn(mesh, species.len(), |c, _, i| species[i][c]))
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() / self.n_species
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: usize, species: usize) -> f64 {
        self.values[cell * self.n_species + species]
    }

    pub fn set(&mut self, cell: usize, species: usize, value: f64) {
        self.values[cell * self.n_species + species] = value;
    }

    /// State vector of one cell.
    pub fn cell(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.n_species..(cell + 1) * self.n_species]
    }

    pub fn species(&self, species: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(species)
            .step_by(self.n_species)
            .copied()
            .collect()
    }

    pub fn set_species(&mut self, species: usize, values: &[f64]) {
        for (c, v) in values.iter().enumerate() {
            self.values[c * self.n_species + species] = *v;
        }
    }

    pub fn is_valid(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Checks that the field lives on `mesh` and is finite.
    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_id != mesh.id() || self.n_cells() != mesh.n_cells() {
            return Err(Error::MeshMismatch {
                expected: mesh.n_cells(),
                got: self.n_cells(),
            });
        }
        if !self.is_valid() {
            return Err(Error::InvalidField);
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Field {
        Field {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        Field {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `sum_cells vol * u_i` per species.
    pub fn mass(&self, mesh: &Mesh) -> Vec<f64> {
        let mut mass = vec![0.0; self.n_species];
        for (c, cell) in mesh.cells.iter().enumerate() {
            for (i, m) in mass.iter_mut().enumerate() {
                *m += cell.volume * self.get(c, i);
            }
        }
        mass
    }

    /// Writes `cell,region,x1[,x2],<species...>` rows.
    pub fn write_csv<W: Write>(&self, mesh: &Mesh, names: &[String], mut out: W) -> std::io::Result<()> {
        let dim = mesh.dimension();
        let mut header = vec!["cell".to_string(), "region".to_string()];
        header.extend((1..=dim).map(|d| format!("x{d}")));
        header.extend(names.iter().cloned());
        writeln!(out, "{}", header.join(","))?;
        for (c, cell) in mesh.cells.iter().enumerate() {
            let mut row = vec![c.to_string(), region_tag(cell.region).to_string()];
            row.extend(cell.position.iter().map(|x| fmt_f64(*x)));
            row.extend(self.cell(c).iter().map(|v| fmt_f64(*v)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads the species columns `names` (by header) of a CSV keyed by a `cell` column.
    pub fn read_csv<R: BufRead>(mesh: &Mesh, names: &[String], input: R) -> Result<Field> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::io("<csv>", "empty file"))?
            .map_err(|e| Error::io("<csv>", e))?;
        let columns: Vec<&str> = header.split(',').collect();
        let find = |name: &str| {
            columns
                .iter()
                .position(|c| *c == name)
                .ok_or_else(|| Error::io("<csv>", format!("missing column {name}")))
        };
        let cell_col = find("cell")?;
        let species_cols = names.iter().map(|n| find(n)).collect::<Result<Vec<_>>>()?;
        let mut field = Field::zeros(mesh, names.len());
        let mut seen = vec![false; mesh.n_cells()];
        for (line_no, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<csv>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            let parse_err = |what: &str| Error::io("<csv>", format!("line {}: bad {what}", line_no + 2));
            let cell: usize = parts
                .get(cell_col)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("cell id"))?;
            if cell >= mesh.n_cells() {
                return Err(Error::MeshMismatch {
                    expected: mesh.n_cells(),
                    got: cell + 1,
                });
            }
            for (i, &col) in species_cols.iter().enumerate() {
                let v: f64 = parts
                    .get(col)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err("value"))?;
                field.set(cell, i, v);
            }
            seen[cell] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::io("<csv>", format!("cell {missing} missing")));
        }
        Ok(field)
    }
}

pub fn region_tag(region: Region) -> &'static str {
    match region {
        Region::Interior => "U",
        Region::Collar => "S",
    }
}

/// Open box `X = prod_i (lower_i, upper_i)`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceX {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl StateSpaceX {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::ParameterDomain(
                "state box needs matching, nonempty lower and upper bounds".into(),
            ));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::ParameterDomain(format!(
                    "state box species {i}: need lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        Ok(StateSpaceX { lower, upper })
    }

    /// `(0, inf)^n`.
    pub fn positive(n: usize) -> Self {
        StateSpaceX {
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    /// All of `R^n`.
    pub fn whole(n: usize) -> Self {
        StateSpaceX {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn n_species(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, state: &[f64]) -> bool {
        state
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| v > lo && v < hi)
    }

    /// Distance of a single component to the nearest finite face.
    pub fn component_distance(&self, species: usize, value: f64) -> f64 {
        (value - self.lower[species]).min(self.upper[species] - value)
    }
}

/// Minimum over cells and species of the distance to the finite faces of `X`;
/// `+inf` when `X` has no finite face.
pub fn dist_to_state_boundary(u: &Field, x: &StateSpaceX) -> f64 {
    let n = u.n_species();
    u.values()
        .iter()
        .enumerate()
        .map(|(k, v)| x.component_distance(k % n, *v))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainSpec, WeightProfile};

    fn mesh() -> Mesh {
        let d = DomainSpec::interval(2.0, 0.5).unwrap();
        let w = WeightProfile::new(0.5, 1.0).unwrap();
        Mesh::build(&d, &w, 6, 6, 2.0).unwrap()
    }

    #[test]
    fn distance_to_state_boundary() {
        let m = mesh();
        let u = Field::constant(&m, &[0.2]);
        assert!((dist_to_state_boundary(&u, &StateSpaceX::positive(1)) - 0.2).abs() < 1e-15);
        let v = Field::constant(&m, &[0.5, 0.05]);
        assert!((dist_to_state_boundary(&v, &StateSpaceX::positive(2)) - 0.05).abs() < 1e-15);
        assert_eq!(dist_to_state_boundary(&v, &StateSpaceX::whole(2)), f64::INFINITY);
        let boxed = StateSpaceX::new(vec![0.0, 0.0], vec![1.0, 0.07]).unwrap();
        assert!((dist_to_state_boundary(&v, &boxed) - 0.02).abs() < 1e-14);
    }

    #[test]
    fn state_box_validation() {
        assert!(StateSpaceX::new(vec![1.0], vec![1.0]).is_err());
        assert!(StateSpaceX::new(vec![0.0], vec![]).is_err());
        let x = StateSpaceX::positive(2);
        assert!(x.contains(&[0.1, 3.0]));
        assert!(!x.contains(&[0.0, 3.0]));
    }

    #[test]
    fn csv_round_trip() {
        let m = mesh();
        let u = Field::from_fn(&m, 2, |c, _, i| (c as f64).sin() * 1e-3 + i as f64 / 3.0);
        let names = vec!["u".to_string(), "v".to_string()];
        let mut buf = Vec::new();
        u.write_csv(&m, &names, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("cell,region,x1,u,v\n"));
        let back = Field::read_csv(&m, &names, &buf[..]).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn mesh_check() {
        let m = mesh();
        let d = DomainSpec::interval(2.0, 0.5).unwrap();
        let w = WeightProfile::new(0.5, 2.0).unwrap();
        let other = Mesh::build(&d, &w, 6, 6, 2.0).unwrap();
        let u = Field::constant(&other, &[1.0]);
        assert!(matches!(u.check(&m), Err(Error::MeshMismatch { .. })));
        let mut bad = Field::constant(&m, &[1.0]);
        bad.set(0, 0, f64::NAN);
        assert_eq!(bad.check(&m), Err(Error::InvalidField));
    }
}
