//! Discrete weighted norms.
//!
//! On the collar, derivatives are difference quotients in `tau` (so that
//! `|r^s d_y u| = |d_tau u|`) and in boundary arc length; the measure is the cell
//! volume, which already carries the `r^{-s} dy` weight. The interior uses the
//! ordinary Sobolev norm. Both parts are combined additively, term by term.

use serde::{Deserialize, Serialize};

use super::Field;
use crate::geometry::{Block, Mesh, Region, WeightProfile};
use crate::{Error, Result};

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("norm exponent must satisfy 1 < p < inf, got {p}")))
    }
}

fn gather(block: &Block, species: &[f64]) -> Vec<f64> {
    block.cells.iter().map(|&c| species[c]).collect()
}

/// Difference quotient of order 1 or 2 along rows (non-periodic).
fn d_row(a: &[f64], rows: usize, cols: usize, h: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    if order == 0 {
        out.copy_from_slice(a);
        return out;
    }
    for j in 0..cols {
        let at = |i: usize| a[i * cols + j];
        for i in 0..rows {
            out[i * cols + j] = match order {
                1 => {
                    if i == 0 {
                        (at(1) - at(0)) / h
                    } else if i == rows - 1 {
                        (at(i) - at(i - 1)) / h
                    } else {
                        (at(i + 1) - at(i - 1)) / (2.0 * h)
                    }
                }
                _ => {
                    let m = i.clamp(1, rows - 2);
                    (at(m + 1) - 2.0 * at(m) + at(m - 1)) / (h * h)
                }
            };
        }
    }
    out
}

/// Periodic difference quotient along columns; zero when there is one column.
fn d_col(a: &[f64], rows: usize, cols: usize, h: &[f64], order: usize) -> Vec<f64> {
    if order == 0 {
        return a.to_vec();
    }
    let mut out = vec![0.0; a.len()];
    if cols == 1 {
        return out;
    }
    for i in 0..rows {
        let row = &a[i * cols..(i + 1) * cols];
        for j in 0..cols {
            let next = row[(j + 1) % cols];
            let prev = row[(j + cols - 1) % cols];
            out[i * cols + j] = match order {
                1 => (next - prev) / (2.0 * h[i]),
                _ => (next - 2.0 * row[j] + prev) / (h[i] * h[i]),
            };
        }
    }
    out
}

fn derivative(block: &Block, a: &[f64], row_order: usize, col_order: usize) -> Vec<f64> {
    let along_rows = d_row(a, block.rows, block.cols, block.row_spacing, row_order);
    d_col(&along_rows, block.rows, block.cols, &block.col_spacing, col_order)
}

fn power_sum(block: &Block, mesh: &Mesh, d: &[f64], p: f64) -> f64 {
    block
        .cells
        .iter()
        .zip(d)
        .map(|(&c, v)| v.abs().powf(p) * mesh.cells[c].volume)
        .sum()
}

/// `(sum_cells |u|^p vol)^{1/p}` over all cells and species.
pub fn weighted_lp_norm(u: &Field, mesh: &Mesh, p: f64) -> Result<f64> {
    check_p(p)?;
    u.check(mesh)?;
    let n = u.n_species();
    let sum: f64 = u
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v.abs().powf(p) * mesh.cells[k / n].volume)
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// `p`-th power sums of the individual terms of the `W^k_p` norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevTerms {
    /// Collar term `i` collects `(r^s d_y)^i` derivatives with up to `k - i`
    /// tangential derivatives.
    pub collar: Vec<f64>,
    pub interior: f64,
}

impl SobolevTerms {
    pub fn norm(&self, p: f64) -> f64 {
        self.collar.iter().map(|t| t.powf(1.0 / p)).sum::<f64>() + self.interior.powf(1.0 / p)
    }
}

pub fn sobolev_terms(u: &Field, mesh: &Mesh, k: usize, p: f64) -> Result<SobolevTerms> {
    check_p(p)?;
    u.check(mesh)?;
    if k > 2 {
        return Err(Error::ParameterDomain(format!("Sobolev order must be 0, 1 or 2, got {k}")));
    }
    for block in &mesh.blocks {
        if block.rows < k + 1 || (block.cols > 1 && block.cols < k + 1) {
            return Err(Error::MeshTooCoarse(format!(
                "{}x{} block cannot carry order-{k} differences",
                block.rows, block.cols
            )));
        }
    }
    let mut terms = SobolevTerms {
        collar: vec![0.0; k + 1],
        interior: 0.0,
    };
    for species in 0..u.n_species() {
        let values = u.species(species);
        for block in &mesh.blocks {
            let a = gather(block, &values);
            for i in 0..=k {
                for j in 0..=(k - i) {
                    if j > 0 && block.cols == 1 {
                        continue;
                    }
                    let d = derivative(block, &a, i, j);
                    let s = power_sum(block, mesh, &d, p);
                    match block.region {
                        Region::Collar => terms.collar[i] += s,
                        Region::Interior => terms.interior += s,
                    }
                }
            }
        }
    }
    Ok(terms)
}

/// Discrete `W^k_p(Omega; s)` norm, `k <= 2`.
pub fn weighted_sobolev_norm(u: &Field, mesh: &Mesh, k: usize, p: f64) -> Result<f64> {
    Ok(sobolev_terms(u, mesh, k, p)?.norm(p))
}

/// The pieces of the discrete `BC^1` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcComponents {
    /// `max |u|`.
    pub sup: f64,
    /// `max |d_tau u| = max |r^s d_y u|` over collar cells.
    pub collar_normal: f64,
    /// `max |d_y u|` over collar cells, i.e. the same term without the weight.
    pub collar_normal_unweighted: f64,
    /// Max of tangential collar and interior first differences.
    pub tangential_interior: f64,
}

pub fn bc_components(u: &Field, mesh: &Mesh, weight: &WeightProfile) -> Result<BcComponents> {
    u.check(mesh)?;
    let mut out = BcComponents {
        sup: u.max_abs(),
        collar_normal: 0.0,
        collar_normal_unweighted: 0.0,
        tangential_interior: 0.0,
    };
    for species in 0..u.n_species() {
        let values = u.species(species);
        for block in &mesh.blocks {
            let a = gather(block, &values);
            let rows = derivative(block, &a, 1, 0);
            let cols = derivative(block, &a, 0, 1);
            let tangential = cols.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            match block.region {
                Region::Collar => {
                    for (&c, d) in block.cells.iter().zip(&rows) {
                        let y = mesh.cells[c].collar.map(|cc| cc.y).unwrap_or(1.0);
                        out.collar_normal = out.collar_normal.max(d.abs());
                        out.collar_normal_unweighted =
                            out.collar_normal_unweighted.max(d.abs() / weight.r_pow_s(y));
                    }
                    out.tangential_interior = out.tangential_interior.max(tangential);
                }
                Region::Interior => {
                    let radial = rows.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    out.tangential_interior = out.tangential_interior.max(radial).max(tangential);
                }
            }
        }
    }
    Ok(out)
}

/// Discrete `BC^k(Omega; s)` norm for `k` in `{0, 1}`.
pub fn bc_norm(u: &Field, mesh: &Mesh, k: usize) -> Result<f64> {
    let c = bc_components(u, mesh, &mesh.weight)?;
    match k {
        0 => Ok(c.sup),
        1 => Ok(c.sup + c.collar_normal + c.tangential_interior),
        _ => Err(Error::ParameterDomain(format!("BC order must be 0 or 1, got {k}"))),
    }
}

/// Share of the `L_p` mass carried by the deepest collar layer.
pub fn deep_layer_fraction(u: &Field, mesh: &Mesh, p: f64) -> f64 {
    let n = u.n_species();
    let mut deep = 0.0;
    let mut total = 0.0;
    for (k, v) in u.values().iter().enumerate() {
        let cell = &mesh.cells[k / n];
        let w = v.abs().powf(p) * cell.volume;
        total += w;
        if cell.collar.map(|c| c.layer + 1 == mesh.n_collar).unwrap_or(false) {
            deep += w;
        }
    }
    if total > 0.0 {
        deep / total
    } else {
        0.0
    }
}

/// Discrete `W^{(2,1)}_p` norm of a uniformly sampled trajectory: the max of
/// the `L_p(J; W^2_p)` and `W^1_p(J; L_p)` parts (trapezoidal rule in time,
/// forward difference quotients for the time derivative).
pub fn trajectory_norm(traj: &[Field], mesh: &Mesh, p: f64, dt: f64) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::TooFewSamples(traj.len()));
    }
    if !(dt > 0.0) {
        return Err(Error::ParameterDomain(format!("time step must be positive, got {dt}")));
    }
    let last = traj.len() - 1;
    let weight = |n: usize| if n == 0 || n == last { 0.5 * dt } else { dt };
    let mut space = 0.0;
    let mut time = 0.0;
    for (n, u) in traj.iter().enumerate() {
        space += weight(n) * weighted_sobolev_norm(u, mesh, 2, p)?.powf(p);
        time += weight(n) * weighted_lp_norm(u, mesh, p)?.powf(p);
    }
    for pair in traj.windows(2) {
        let rate = pair[1].sub(&pair[0]).scaled(1.0 / dt);
        time += dt * weighted_lp_norm(&rate, mesh, p)?.powf(p);
    }
    Ok(space.powf(1.0 / p).max(time.powf(1.0 / p)))
}

/// Flat summary of the norms of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub lp: f64,
    pub w1p: f64,
    pub w2p: f64,
    pub bc0: f64,
    pub bc1s: f64,
    pub p: f64,
    pub s: f64,
    /// Deepest collar layer carries more than 10% of the `L_p` mass.
    pub deep_layer_flag: bool,
}

impl NormReport {
    pub fn compute(u: &Field, mesh: &Mesh, p: f64) -> Result<NormReport> {
        Ok(NormReport {
            lp: weighted_lp_norm(u, mesh, p)?,
            w1p: weighted_sobolev_norm(u, mesh, 1, p)?,
            w2p: weighted_sobolev_norm(u, mesh, 2, p)?,
            bc0: bc_norm(u, mesh, 0)?,
            bc1s: bc_norm(u, mesh, 1)?,
            p,
            s: mesh.weight.s(),
            deep_layer_flag: deep_layer_fraction(u, mesh, p) > 0.1,
        })
    }
}
