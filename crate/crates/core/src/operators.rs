//! Degenerate gradient/divergence pair and the finite-volume operator
//! `A_s(a) v = -div_s(a grad_s v)`.
//!
//! In the stretched coordinate the collar part is `-d_tau(a d_tau v)` plus the
//! tangential divergence, so every face contributes the two-point flux
//! `a_f (area / distance) (v_to - v_from)` with `a_f` the harmonic mean of the
//! adjacent cell coefficients. The truncation faces are zero-flux.

use std::io::Write;

use crate::fields::{fmt_f64, Field};
use crate::geometry::{FaceKind, Mesh, WeightProfile};
use crate::linalg::CsrMatrix;
use crate::{Error, Result};

/// Finite-volume matrix of one species together with the cell volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: CsrMatrix,
    pub volumes: Vec<f64>,
}

/// Largest observed violations of the structural invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCheck {
    /// `max_i |sum_j A_ij| / A_ii`.
    pub row_sum: f64,
    /// `max_ij |vol_i A_ij - vol_j A_ji| / max |vol A|`.
    pub symmetry: f64,
    /// Off-diagonal entries are `<= 0` and diagonals `>= 0`.
    pub sign_pattern: bool,
}

impl OperatorMatrix {
    pub fn n(&self) -> usize {
        self.matrix.n
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.matrix.mul_vec(u)
    }

    /// `u^T (Vol A) u`.
    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        let au = self.apply(u)?;
        Ok(au.iter().zip(u).zip(&self.volumes).map(|((a, x), v)| a * x * v).sum())
    }

    pub fn structure(&self) -> StructureCheck {
        let m = &self.matrix;
        let mut row_sum = 0.0_f64;
        let mut sign_pattern = true;
        let mut max_entry = 0.0_f64;
        for i in 0..m.n {
            let mut sum = 0.0;
            let mut diag = 0.0;
            for (j, v) in m.row(i) {
                sum += v;
                if i == j {
                    diag = v;
                    sign_pattern &= v >= 0.0;
                } else {
                    sign_pattern &= v <= 0.0;
                }
                max_entry = max_entry.max((self.volumes[i] * v).abs());
            }
            if diag > 0.0 {
                row_sum = row_sum.max(sum.abs() / diag);
            } else {
                row_sum = row_sum.max(sum.abs());
            }
        }
        let mut symmetry = 0.0_f64;
        for i in 0..m.n {
            for (j, v) in m.row(i) {
                let mirrored = m.get(j, i);
                let gap = (self.volumes[i] * v - self.volumes[j] * mirrored).abs();
                symmetry = symmetry.max(gap);
            }
        }
        StructureCheck {
            row_sum,
            symmetry: if max_entry > 0.0 { symmetry / max_entry } else { symmetry },
            sign_pattern,
        }
    }

    /// Coordinate-format dump: one `row col value` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.matrix.n {
            for (j, v) in self.matrix.row(i) {
                writeln!(out, "{i} {j} {}", fmt_f64(v))?;
            }
        }
        Ok(())
    }
}

/// Harmonic mean of the coefficients on both sides of every face.
pub fn face_coefficients(a: &[f64], mesh: &Mesh) -> Vec<f64> {
    mesh.faces
        .iter()
        .map(|f| {
            let (l, r) = (a[f.cells[0]], a[f.cells[1]]);
            2.0 * l * r / (l + r)
        })
        .collect()
}

fn check_coefficient(a: &[f64], mesh: &Mesh) -> Result<()> {
    if a.len() != mesh.n_cells() {
        return Err(Error::DimensionMismatch { expected: mesh.n_cells(), got: a.len() });
    }
    for (cell, &value) in a.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonpositiveCoefficient { cell, value });
        }
    }
    Ok(())
}

/// Assembles `A_s(a)` for a strictly positive per-cell coefficient.
pub fn assemble_as(a: &[f64], mesh: &Mesh) -> Result<OperatorMatrix> {
    check_coefficient(a, mesh)?;
    let volumes = mesh.volumes();
    let coeffs = face_coefficients(a, mesh);
    let mut rows: Vec<Vec<(usize, f64)>> = (0..mesh.n_cells()).map(|i| vec![(i, 0.0)]).collect();
    for (face, af) in mesh.faces.iter().zip(&coeffs) {
        let w = af * face.transmissibility();
        let [i, j] = face.cells;
        rows[i][0].1 += w / volumes[i];
        rows[i].push((j, -w / volumes[i]));
        rows[j][0].1 += w / volumes[j];
        rows[j].push((i, -w / volumes[j]));
    }
    Ok(OperatorMatrix {
        matrix: CsrMatrix::from_rows(rows),
        volumes,
    })
}

/// Matrix-vector product `A u`.
pub fn apply_as(op: &OperatorMatrix, u: &[f64]) -> Result<Vec<f64>> {
    op.apply(u)
}

/// Per-face degenerate gradient of one species. Collar-normal faces carry
/// `rho^s d_nu u = -d_tau u`; all other faces the ordinary difference quotient
/// in face orientation.
pub fn grad_s(u: &Field, species: usize, mesh: &Mesh) -> Result<Vec<f64>> {
    u.check(mesh)?;
    Ok(mesh
        .faces
        .iter()
        .map(|f| {
            let diff = (u.get(f.cells[1], species) - u.get(f.cells[0], species)) / f.distance;
            match f.kind {
                FaceKind::CollarNormal => -diff,
                _ => diff,
            }
        })
        .collect())
}

/// Physical face fluxes `a rho^{2s} d_nu u` (collar-normal faces) and
/// `a grad u` components (other faces), oriented per face.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateFlux {
    pub values: Vec<f64>,
}

impl DegenerateFlux {
    /// Flux as seen from `cell` (sign flips on the `to` side).
    pub fn seen_from(&self, mesh: &Mesh, face: usize, cell: usize) -> f64 {
        if mesh.faces[face].cells[0] == cell {
            self.values[face]
        } else {
            -self.values[face]
        }
    }
}

fn face_y(mesh: &Mesh, weight: &WeightProfile, face: usize) -> f64 {
    let f = &mesh.faces[face];
    if *weight == mesh.weight {
        f.y.unwrap_or(1.0)
    } else {
        f.tau.map(|t| weight.y_of_tau(t)).unwrap_or(1.0)
    }
}

pub fn degenerate_flux(
    u: &Field,
    species: usize,
    a: &[f64],
    mesh: &Mesh,
    weight: &WeightProfile,
) -> Result<DegenerateFlux> {
    check_coefficient(a, mesh)?;
    let grad = grad_s(u, species, mesh)?;
    let coeffs = face_coefficients(a, mesh);
    let values = mesh
        .faces
        .iter()
        .enumerate()
        .map(|(k, f)| match f.kind {
            FaceKind::CollarNormal => coeffs[k] * weight.r_pow_s(face_y(mesh, weight, k)) * grad[k],
            _ => coeffs[k] * grad[k],
        })
        .collect();
    Ok(DegenerateFlux { values })
}

/// `(y, max_q |a rho^{2s} d_nu u|)` for every interior collar-normal face
/// layer, from the seam towards the boundary.
pub fn normal_flux_profile(
    u: &Field,
    species: usize,
    a: &[f64],
    mesh: &Mesh,
    weight: &WeightProfile,
) -> Result<Vec<(f64, f64)>> {
    let flux = degenerate_flux(u, species, a, mesh, weight)?;
    let mut per_layer = vec![(0.0, 0.0_f64); mesh.n_collar];
    for (k, f) in mesh.faces.iter().enumerate() {
        if f.kind == FaceKind::CollarNormal {
            let layer = f.layer.expect("normal faces carry a layer");
            per_layer[layer].0 = face_y(mesh, weight, k);
            per_layer[layer].1 = per_layer[layer].1.max(flux.values[k].abs());
        }
    }
    Ok(per_layer.into_iter().skip(1).collect())
}

/// `(y, max_q |a grad_h u|)` per collar layer; empty on the interval.
pub fn tangential_flux_profile(
    u: &Field,
    species: usize,
    a: &[f64],
    mesh: &Mesh,
    weight: &WeightProfile,
) -> Result<Vec<(f64, f64)>> {
    let flux = degenerate_flux(u, species, a, mesh, weight)?;
    let mut per_layer: Vec<Option<(f64, f64)>> = vec![None; mesh.n_collar];
    for (k, f) in mesh.faces.iter().enumerate() {
        if f.kind == FaceKind::CollarTangential {
            let layer = f.layer.expect("tangential faces carry a layer");
            let y = face_y(mesh, weight, k);
            let entry = per_layer[layer].get_or_insert((y, 0.0));
            entry.1 = entry.1.max(flux.values[k].abs());
        }
    }
    Ok(per_layer.into_iter().flatten().collect())
}

/// Writes `y,flux` rows.
pub fn write_profile_csv<W: Write>(profile: &[(f64, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "y,flux")?;
    for (y, f) in profile {
        writeln!(out, "{},{}", fmt_f64(*y), fmt_f64(*f))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    fn interval(s: f64, n_collar: usize) -> Mesh {
        let d = DomainSpec::interval(2.0, 0.5).unwrap();
        let w = WeightProfile::new(0.5, s).unwrap();
        Mesh::build(&d, &w, n_collar, 8, 2.0).unwrap()
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let m = interval(1.0, 8);
        let op = assemble_as(&vec![1.0; m.n_cells()], &m).unwrap();
        let au = op.apply(&vec![1.0; m.n_cells()]).unwrap();
        assert!(au.iter().all(|v| v.abs() < 1e-13));
        assert!(op.apply(&vec![0.0; m.n_cells()]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nonpositive_coefficient_rejected() {
        let m = interval(1.0, 8);
        let mut a = vec![1.0; m.n_cells()];
        a[3] = 0.0;
        assert!(matches!(
            assemble_as(&a, &m),
            Err(Error::NonpositiveCoefficient { cell: 3, .. })
        ));
    }

    #[test]
    fn dimension_mismatch_on_apply() {
        let m = interval(1.0, 8);
        let op = assemble_as(&vec![1.0; m.n_cells()], &m).unwrap();
        assert!(matches!(op.apply(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn grad_of_tau_is_minus_one_on_normal_faces() {
        for &s in &[1.0, 1.7, 3.0] {
            let m = interval(s, 12);
            let u = Field::from_fn(&m, 1, |c, m, _| m.cells[c].collar.map(|cc| cc.tau).unwrap_or(0.0));
            let g = grad_s(&u, 0, &m).unwrap();
            for (f, v) in m.faces.iter().zip(&g) {
                if f.kind == FaceKind::CollarNormal {
                    assert!((v + 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn flux_profile_of_tau_is_r_pow_s() {
        let m = interval(2.0, 16);
        let u = Field::from_fn(&m, 1, |c, m, _| m.cells[c].collar.map(|cc| cc.tau).unwrap_or(0.0));
        let a = vec![1.0; m.n_cells()];
        let profile = normal_flux_profile(&u, 0, &a, &m, &m.weight).unwrap();
        assert_eq!(profile.len(), 15);
        for (y, f) in profile {
            assert!((f - m.weight.r_pow_s(y)).abs() < 1e-12);
        }
        let constant = Field::constant(&m, &[2.0]);
        let zero = normal_flux_profile(&constant, 0, &a, &m, &m.weight).unwrap();
        assert!(zero.iter().all(|(_, f)| *f == 0.0));
    }

    #[test]
    fn flux_is_antisymmetric() {
        let m = interval(1.0, 8);
        let u = Field::from_fn(&m, 1, |c, _, _| (c as f64 * 0.7).sin());
        let a: Vec<f64> = (0..m.n_cells()).map(|c| 1.0 + 0.1 * c as f64).collect();
        let flux = degenerate_flux(&u, 0, &a, &m, &m.weight).unwrap();
        for (k, f) in m.faces.iter().enumerate() {
            let [i, j] = f.cells;
            assert_eq!(flux.seen_from(&m, k, i), -flux.seen_from(&m, k, j));
        }
    }

    #[test]
    fn coo_dump_lists_every_entry() {
        let m = interval(1.0, 4);
        let op = assemble_as(&vec![1.0; m.n_cells()], &m).unwrap();
        let mut buf = Vec::new();
        op.write_coo(&mut buf).unwrap();
        let lines = String::from_utf8(buf).unwrap().lines().count();
        assert_eq!(lines, op.matrix.values.len());
    }
}
