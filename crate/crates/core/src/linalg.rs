//! Sparse row-compressed matrices with a banded direct solver and a
//! Jacobi-preconditioned conjugate gradient.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(col, value)` lists; duplicate columns are summed
    /// and each row is sorted by column.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map(|e| e.1).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok((0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect())
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// `diag(scale) * self + diag(shift)`; both vectors have length `n`.
    pub fn scale_rows_and_shift(&self, scale: &[f64], shift: &[f64]) -> CsrMatrix {
        let rows = (0..self.n)
            .map(|i| {
                let mut row: Vec<(usize, f64)> = self.row(i).map(|(j, v)| (j, scale[i] * v)).collect();
                row.push((i, shift[i]));
                row
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }
}

/// Gaussian elimination on the band without pivoting. Fails on a nonpositive
/// pivot, which for row-scaled symmetric systems means loss of definiteness.
pub fn solve_banded(m: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = m.n;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let bw = m.bandwidth();
    let width = 2 * bw + 1;
    let mut band = vec![0.0; n * width];
    let idx = |i: usize, j: usize| i * width + (j + bw - i);
    for i in 0..n {
        for (j, v) in m.row(i) {
            band[idx(i, j)] = v;
        }
    }
    let mut x = b.to_vec();
    for k in 0..n {
        let pivot = band[idx(k, k)];
        let scale = (k.saturating_sub(bw)..(k + bw + 1).min(n))
            .map(|j| band[idx(k, j)].abs())
            .fold(0.0_f64, f64::max);
        if !(pivot > 1e-14 * scale) {
            return Err(Error::LinearSolver(format!("nonpositive pivot {pivot:e} at row {k}")));
        }
        let end = (k + bw + 1).min(n);
        for i in (k + 1)..end {
            let factor = band[idx(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..end {
                band[idx(i, j)] -= factor * band[idx(k, j)];
            }
            x[i] -= factor * x[k];
        }
    }
    for k in (0..n).rev() {
        let end = (k + bw + 1).min(n);
        let mut acc = x[k];
        for j in (k + 1)..end {
            acc -= band[idx(k, j)] * x[j];
        }
        x[k] = acc / band[idx(k, k)];
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::LinearSolver("non-finite solution".into()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG for symmetric positive definite `m`, stopping at
/// `||r|| <= rel_tol ||b||`.
pub fn solve_pcg(m: &CsrMatrix, b: &[f64], x0: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = m.n;
    if b.len() != n || x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len().min(x0.len()) });
    }
    let inv_diag: Vec<f64> = m
        .diagonal()
        .iter()
        .map(|d| if *d > 0.0 { 1.0 / d } else { f64::NAN })
        .collect();
    if inv_diag.iter().any(|d| d.is_nan()) {
        return Err(Error::LinearSolver("nonpositive diagonal in CG system".into()));
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = x0.to_vec();
    let ax = m.mul_vec(&x)?;
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= rel_tol * b_norm {
            return Ok(x);
        }
        let ap = m.mul_vec(&p)?;
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::LinearSolver(format!("CG breakdown, p'Ap = {curvature:e}")));
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if dot(&r, &r).sqrt() <= rel_tol * b_norm {
        Ok(x)
    } else {
        Err(Error::LinearSolver(format!("CG did not converge in {max_iter} iterations")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> CsrMatrix {
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![(i, 2.0 + shift)];
                if i > 0 {
                    row.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    row.push((i + 1, -1.0));
                }
                row
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn banded_matches_known_solution() {
        let m = laplacian_1d(50, 0.1);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = m.mul_vec(&x_true).unwrap();
        let x = solve_banded(&m, &b).unwrap();
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
        assert_eq!(m.bandwidth(), 1);
    }

    #[test]
    fn pcg_matches_banded() {
        let m = laplacian_1d(40, 0.05);
        let b: Vec<f64> = (0..40).map(|i| 1.0 + (i as f64).cos()).collect();
        let direct = solve_banded(&m, &b).unwrap();
        let iter = solve_pcg(&m, &b, &vec![0.0; 40], 1e-13, 1000).unwrap();
        for (a, e) in iter.iter().zip(&direct) {
            assert!((a - e).abs() < 1e-9);
        }
    }

    #[test]
    fn indefinite_systems_fail() {
        let m = laplacian_1d(10, -3.0);
        let b = vec![1.0; 10];
        assert!(solve_banded(&m, &b).is_err());
        assert!(solve_pcg(&m, &b, &vec![0.0; 10], 1e-12, 100).is_err());
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let m = CsrMatrix::from_rows(vec![vec![(1, 1.0), (0, 2.0), (1, 0.5)], vec![(1, 3.0)]]);
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0]).unwrap(), vec![3.5, 3.0]);
        assert!(m.mul_vec(&[1.0]).is_err());
    }
}
