//! Finite-volume mesh over the collar (uniform in the stretched coordinate)
//! and the interior (uniform in Cartesian or polar coordinates).
//!
//! Collar layer `k` of ray `q` covers `tau in [k dtau, (k+1) dtau]`; layer 0 touches
//! the seam `y = eps` and layer `n_collar - 1` ends on a zero-flux truncation face
//! at `tau = tau_max`. Collar cell volumes are `dtau` times the boundary measure
//! element, which is exactly the `r^{-s} dy` measure of the weighted spaces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::domain::{DomainKind, DomainSpec};
use super::weight::{WeightKind, WeightProfile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    Collar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarCoords {
    /// Collar ray (boundary cell) index.
    pub q: usize,
    pub layer: usize,
    pub tau: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub region: Region,
    /// Cartesian position in the physical domain.
    pub position: Vec<f64>,
    pub collar: Option<CollarCoords>,
    /// Volume in the `g_s` metric.
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    /// Between consecutive collar layers; oriented towards larger `tau`.
    CollarNormal,
    /// Between angular neighbours inside one collar layer.
    CollarTangential,
    /// Between collar layer 0 and the interior; oriented collar -> interior.
    Seam,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    /// `[from, to]`; gradients are `(u[to] - u[from]) / distance`.
    pub cells: [usize; 2],
    pub kind: FaceKind,
    pub area: f64,
    pub distance: f64,
    /// Stretched depth of a collar face (normal faces: the face itself,
    /// tangential faces: the layer centre).
    pub tau: Option<f64>,
    pub y: Option<f64>,
    /// Collar layer index for tangential faces, or the deeper layer for normal faces.
    pub layer: Option<usize>,
}

impl Face {
    pub fn transmissibility(&self) -> f64 {
        self.area / self.distance
    }
}

/// Zero-flux face closing a collar ray at `tau = tau_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationFace {
    pub cell: usize,
    pub area: f64,
}

/// Logically rectangular block of cells used for difference quotients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub region: Region,
    /// Row-major `rows x cols` cell indices.
    pub cells: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
    /// Spacing along rows (the `tau` or radial / `x` direction).
    pub row_spacing: f64,
    /// Spacing along columns for each row (arc length); unused when `cols == 1`.
    pub col_spacing: Vec<f64>,
}

impl Block {
    pub fn cell(&self, row: usize, col: usize) -> usize {
        self.cells[row * self.cols + col]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    id: u64,
    pub domain: DomainSpec,
    pub weight: WeightProfile,
    pub n_collar: usize,
    pub n_interior: usize,
    pub tau_max: f64,
    pub d_tau: f64,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub truncation_faces: Vec<TruncationFace>,
    /// `collar_rays[q][layer]` is the cell index.
    pub collar_rays: Vec<Vec<usize>>,
    pub blocks: Vec<Block>,
}

fn fingerprint(parts: &[u64]) -> u64 {
    // FNV-1a over the bit patterns; stable across runs and platforms.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

impl Mesh {
    pub fn build(
        domain: &DomainSpec,
        weight: &WeightProfile,
        n_collar: usize,
        n_interior: usize,
        tau_max: f64,
    ) -> Result<Mesh> {
        if n_collar < 2 || n_interior < 2 {
            return Err(Error::ParameterDomain(format!(
                "need at least 2 collar and 2 interior cells, got {n_collar} and {n_interior}"
            )));
        }
        if !(tau_max > 0.0 && tau_max.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "tau_max must be positive, got {tau_max}"
            )));
        }
        if (weight.epsilon() - domain.collar_depth).abs() > 1e-15 {
            return Err(Error::ParameterDomain(format!(
                "weight collar depth {} differs from domain collar depth {}",
                weight.epsilon(),
                domain.collar_depth
            )));
        }
        if weight.kind() == WeightKind::Flat && tau_max > weight.epsilon() * (1.0 + 1e-12) {
            return Err(Error::ParameterDomain(format!(
                "flat weight maps tau onto [0, eps]; tau_max {tau_max} exceeds eps {}",
                weight.epsilon()
            )));
        }
        let d_tau = tau_max / n_collar as f64;
        let interior_extent = match domain.kind {
            DomainKind::Interval => domain.extent - 2.0 * domain.collar_depth,
            DomainKind::Disk => domain.extent - domain.collar_depth,
        };
        let d_interior = interior_extent / n_interior as f64;
        let seam_width = weight.epsilon() - weight.y_of_tau(d_tau);
        let ratio = (seam_width / d_interior).max(d_interior / seam_width);
        if !(ratio <= 10.0) {
            return Err(Error::MeshQuality(format!(
                "seam cell widths differ by factor {ratio:.3} (collar {seam_width:.3e}, interior {d_interior:.3e})"
            )));
        }

        let mut builder = Builder {
            weight,
            d_tau,
            cells: Vec::new(),
            faces: Vec::new(),
        };
        let (collar_rays, truncation_faces, blocks) = match domain.kind {
            DomainKind::Interval => builder.interval(domain, n_collar, n_interior, d_interior),
            DomainKind::Disk => builder.disk(domain, n_collar, n_interior, d_interior),
        };
        let id = fingerprint(&[
            domain.kind as u64,
            domain.extent.to_bits(),
            domain.collar_depth.to_bits(),
            domain.boundary_resolution as u64,
            weight.s().to_bits(),
            weight.kind() as u64,
            n_collar as u64,
            n_interior as u64,
            tau_max.to_bits(),
        ]);
        Ok(Mesh {
            id,
            domain: domain.clone(),
            weight: weight.clone(),
            n_collar,
            n_interior,
            tau_max,
            d_tau,
            cells: builder.cells,
            faces: builder.faces,
            truncation_faces,
            collar_rays,
            blocks,
        })
    }

    /// Stable identity used to tie fields to their mesh.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.volume).collect()
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    /// Faces touching each cell, as `(face index, is_from_side)`.
    pub fn cell_faces(&self) -> Vec<Vec<(usize, bool)>> {
        let mut adj = vec![Vec::new(); self.cells.len()];
        for (f, face) in self.faces.iter().enumerate() {
            adj[face.cells[0]].push((f, true));
            adj[face.cells[1]].push((f, false));
        }
        adj
    }

    /// Distance to the boundary for every cell (`None` in the interior).
    pub fn collar_depth_of(&self, cell: usize) -> Option<f64> {
        self.cells[cell].collar.map(|c| c.y)
    }

    /// Collar cells in the exact-distance zone `y <= eps/3`.
    pub fn in_exact_zone(&self, cell: usize) -> bool {
        self.cells[cell]
            .collar
            .map(|c| c.y <= self.weight.epsilon() / 3.0)
            .unwrap_or(false)
    }

    /// Writes the cell and face tables as JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mesh serialization")
    }
}

struct Builder<'a> {
    weight: &'a WeightProfile,
    d_tau: f64,
    cells: Vec<Cell>,
    faces: Vec<Face>,
}

impl Builder<'_> {
    fn layer_tau(&self, layer: usize) -> f64 {
        (layer as f64 + 0.5) * self.d_tau
    }

    fn push_cell(&mut self, cell: Cell) -> usize {
        self.cells.push(cell);
        self.cells.len() - 1
    }

    fn collar_cell(&mut self, q: usize, layer: usize, position: Vec<f64>, volume: f64) -> usize {
        let tau = self.layer_tau(layer);
        let y = self.weight.y_of_tau(tau);
        self.push_cell(Cell {
            region: Region::Collar,
            position,
            collar: Some(CollarCoords { q, layer, tau, y }),
            volume,
        })
    }

    fn normal_faces(&mut self, ray: &[usize], area: f64) {
        for k in 1..ray.len() {
            let tau = k as f64 * self.d_tau;
            self.faces.push(Face {
                cells: [ray[k - 1], ray[k]],
                kind: FaceKind::CollarNormal,
                area,
                distance: self.d_tau,
                tau: Some(tau),
                y: Some(self.weight.y_of_tau(tau)),
                layer: Some(k),
            });
        }
    }

    #[allow(clippy::type_complexity)]
    fn interval(
        &mut self,
        domain: &DomainSpec,
        n_collar: usize,
        n_interior: usize,
        dx: f64,
    ) -> (Vec<Vec<usize>>, Vec<TruncationFace>, Vec<Block>) {
        let eps = domain.collar_depth;
        let length = domain.extent;
        let mut left = vec![0; n_collar];
        for k in (0..n_collar).rev() {
            let y = self.weight.y_of_tau(self.layer_tau(k));
            left[k] = self.collar_cell(0, k, vec![y], self.d_tau);
        }
        let interior: Vec<usize> = (0..n_interior)
            .map(|i| {
                self.push_cell(Cell {
                    region: Region::Interior,
                    position: vec![eps + (i as f64 + 0.5) * dx],
                    collar: None,
                    volume: dx,
                })
            })
            .collect();
        let mut right = vec![0; n_collar];
        for (k, slot) in right.iter_mut().enumerate() {
            let y = self.weight.y_of_tau(self.layer_tau(k));
            *slot = self.collar_cell(1, k, vec![length - y], self.d_tau);
        }

        self.normal_faces(&left, 1.0);
        let seam_distance = 0.5 * (self.d_tau + dx);
        self.faces.push(Face {
            cells: [left[0], interior[0]],
            kind: FaceKind::Seam,
            area: 1.0,
            distance: seam_distance,
            tau: Some(0.0),
            y: Some(eps),
            layer: Some(0),
        });
        for i in 1..n_interior {
            self.faces.push(Face {
                cells: [interior[i - 1], interior[i]],
                kind: FaceKind::Interior,
                area: 1.0,
                distance: dx,
                tau: None,
                y: None,
                layer: None,
            });
        }
        self.faces.push(Face {
            cells: [right[0], interior[n_interior - 1]],
            kind: FaceKind::Seam,
            area: 1.0,
            distance: seam_distance,
            tau: Some(0.0),
            y: Some(eps),
            layer: Some(0),
        });
        self.normal_faces(&right, 1.0);

        let truncation = vec![
            TruncationFace { cell: left[n_collar - 1], area: 1.0 },
            TruncationFace { cell: right[n_collar - 1], area: 1.0 },
        ];
        let collar_block = |cells: &Vec<usize>| Block {
            region: Region::Collar,
            cells: cells.clone(),
            rows: n_collar,
            cols: 1,
            row_spacing: self.d_tau,
            col_spacing: vec![0.0; n_collar],
        };
        let blocks = vec![
            collar_block(&left),
            collar_block(&right),
            Block {
                region: Region::Interior,
                cells: interior,
                rows: n_interior,
                cols: 1,
                row_spacing: dx,
                col_spacing: vec![0.0; n_interior],
            },
        ];
        (vec![left, right], truncation, blocks)
    }

    #[allow(clippy::type_complexity)]
    fn disk(
        &mut self,
        domain: &DomainSpec,
        n_collar: usize,
        n_rings: usize,
        dr: f64,
    ) -> (Vec<Vec<usize>>, Vec<TruncationFace>, Vec<Block>) {
        let radius = domain.extent;
        let n_theta = domain.boundary_resolution;
        let d_theta = 2.0 * PI / n_theta as f64;
        let angle = |j: usize| (j as f64 + 0.5) * d_theta;
        let seam_radius = radius - domain.collar_depth;

        let mut interior = Vec::with_capacity(n_rings * n_theta);
        for i in 0..n_rings {
            let rc = (i as f64 + 0.5) * dr;
            for j in 0..n_theta {
                let t = angle(j);
                interior.push(self.push_cell(Cell {
                    region: Region::Interior,
                    position: vec![rc * t.cos(), rc * t.sin()],
                    collar: None,
                    volume: d_theta * dr * rc,
                }));
            }
        }
        let mut collar = Vec::with_capacity(n_collar * n_theta);
        let mut rays = vec![vec![0; n_collar]; n_theta];
        let collar_volume = self.d_tau * radius * d_theta;
        for k in 0..n_collar {
            let y = self.weight.y_of_tau(self.layer_tau(k));
            for (j, ray) in rays.iter_mut().enumerate() {
                let t = angle(j);
                let rho = radius - y;
                let c = self.collar_cell(j, k, vec![rho * t.cos(), rho * t.sin()], collar_volume);
                ray[k] = c;
                collar.push(c);
            }
        }

        let at = |block: &Vec<usize>, i: usize, j: usize| block[i * n_theta + (j % n_theta)];
        for i in 0..n_rings {
            let rc = (i as f64 + 0.5) * dr;
            for j in 0..n_theta {
                self.faces.push(Face {
                    cells: [at(&interior, i, j), at(&interior, i, j + 1)],
                    kind: FaceKind::Interior,
                    area: dr,
                    distance: rc * d_theta,
                    tau: None,
                    y: None,
                    layer: None,
                });
                if i + 1 < n_rings {
                    self.faces.push(Face {
                        cells: [at(&interior, i, j), at(&interior, i + 1, j)],
                        kind: FaceKind::Interior,
                        area: (i as f64 + 1.0) * dr * d_theta,
                        distance: dr,
                        tau: None,
                        y: None,
                        layer: None,
                    });
                }
            }
        }
        for (j, ray) in rays.iter().enumerate() {
            self.faces.push(Face {
                cells: [ray[0], at(&interior, n_rings - 1, j)],
                kind: FaceKind::Seam,
                area: seam_radius * d_theta,
                distance: 0.5 * (self.d_tau + dr),
                tau: Some(0.0),
                y: Some(domain.collar_depth),
                layer: Some(0),
            });
        }
        for k in 0..n_collar {
            let tau = self.layer_tau(k);
            let y = self.weight.y_of_tau(tau);
            for j in 0..n_theta {
                self.faces.push(Face {
                    cells: [at(&collar, k, j), at(&collar, k, j + 1)],
                    kind: FaceKind::CollarTangential,
                    area: self.d_tau,
                    distance: radius * d_theta,
                    tau: Some(tau),
                    y: Some(y),
                    layer: Some(k),
                });
            }
        }
        for ray in &rays {
            self.normal_faces(ray, radius * d_theta);
        }

        let truncation = rays
            .iter()
            .map(|ray| TruncationFace {
                cell: ray[n_collar - 1],
                area: radius * d_theta,
            })
            .collect();
        let blocks = vec![
            Block {
                region: Region::Collar,
                cells: collar,
                rows: n_collar,
                cols: n_theta,
                row_spacing: self.d_tau,
                col_spacing: vec![radius * d_theta; n_collar],
            },
            Block {
                region: Region::Interior,
                cells: interior,
                rows: n_rings,
                cols: n_theta,
                row_spacing: dr,
                col_spacing: (0..n_rings).map(|i| (i as f64 + 0.5) * dr * d_theta).collect(),
            },
        ];
        (rays, truncation, blocks)
    }
}
