use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Interval,
    Disk,
}

/// Interval `(0, L)` or disk of radius `R` centred at the origin, with its collar depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub extent: f64,
    pub collar_depth: f64,
    /// Angular cells for the disk; always 1 for the interval.
    pub boundary_resolution: usize,
}

impl DomainSpec {
    pub fn interval(length: f64, collar_depth: f64) -> Result<Self> {
        Self::new(DomainKind::Interval, length, collar_depth, 1)
    }

    pub fn disk(radius: f64, collar_depth: f64, boundary_resolution: usize) -> Result<Self> {
        Self::new(DomainKind::Disk, radius, collar_depth, boundary_resolution)
    }

    pub fn new(
        kind: DomainKind,
        extent: f64,
        collar_depth: f64,
        boundary_resolution: usize,
    ) -> Result<Self> {
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "domain extent must be positive, got {extent}"
            )));
        }
        if !(collar_depth > 0.0 && collar_depth <= 1.0) {
            return Err(Error::ParameterDomain(format!(
                "collar depth must lie in (0, 1], got {collar_depth}"
            )));
        }
        if collar_depth >= extent / 2.0 {
            return Err(Error::ParameterDomain(format!(
                "collar depth {collar_depth} must be below half the extent {extent}"
            )));
        }
        let boundary_resolution = match kind {
            DomainKind::Interval => 1,
            DomainKind::Disk if boundary_resolution < 3 => {
                return Err(Error::ParameterDomain(format!(
                    "disk needs at least 3 angular cells, got {boundary_resolution}"
                )))
            }
            DomainKind::Disk => boundary_resolution,
        };
        Ok(DomainSpec {
            kind,
            extent,
            collar_depth,
            boundary_resolution,
        })
    }

    /// Default collar depth `min(1, extent/3)`.
    pub fn default_collar_depth(extent: f64) -> f64 {
        (extent / 3.0).min(1.0)
    }

    /// Spatial dimension `m`.
    pub fn dimension(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            DomainKind::Disk => 2,
        }
    }

    /// Measure of the boundary in its induced metric.
    pub fn boundary_measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => 2.0,
            DomainKind::Disk => 2.0 * PI * self.extent,
        }
    }

    /// Number of collar rays (boundary cells).
    pub fn boundary_cells(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 2,
            DomainKind::Disk => self.boundary_resolution,
        }
    }
}

/// Foot point of a collar point on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPoint {
    /// 0 for `x = 0`, 1 for `x = L`.
    Endpoint(usize),
    /// Polar angle in `[0, 2 pi)`.
    Angle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPoint {
    Collar { y: f64, q: BoundaryPoint },
    Interior,
}

/// Collar chart: distance to the boundary and foot point, or `Interior`
/// beyond the collar depth.
pub fn collar_chart(domain: &DomainSpec, x: &[f64]) -> ChartPoint {
    let eps = domain.collar_depth;
    match domain.kind {
        DomainKind::Interval => {
            let left = x[0];
            let right = domain.extent - x[0];
            let (y, q) = if left <= right { (left, 0) } else { (right, 1) };
            if y <= eps {
                ChartPoint::Collar {
                    y,
                    q: BoundaryPoint::Endpoint(q),
                }
            } else {
                ChartPoint::Interior
            }
        }
        DomainKind::Disk => {
            let radius = x[0].hypot(x[1]);
            let y = domain.extent - radius;
            if y <= eps {
                let mut theta = x[1].atan2(x[0]);
                if theta < 0.0 {
                    theta += 2.0 * PI;
                }
                ChartPoint::Collar {
                    y,
                    q: BoundaryPoint::Angle(theta),
                }
            } else {
                ChartPoint::Interior
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_chart() {
        let d = DomainSpec::interval(2.0, 0.5).unwrap();
        match collar_chart(&d, &[0.2]) {
            ChartPoint::Collar { y, q } => {
                assert!((y - 0.2).abs() < 1e-15);
                assert_eq!(q, BoundaryPoint::Endpoint(0));
            }
            other => panic!("{other:?}"),
        }
        match collar_chart(&d, &[1.9]) {
            ChartPoint::Collar { y, q } => {
                assert!((y - 0.1).abs() < 1e-12);
                assert_eq!(q, BoundaryPoint::Endpoint(1));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(collar_chart(&d, &[1.0]), ChartPoint::Interior);
    }

    #[test]
    fn disk_chart() {
        let d = DomainSpec::disk(1.0, 0.3, 8).unwrap();
        match collar_chart(&d, &[0.8, 0.0]) {
            ChartPoint::Collar { y, q } => {
                assert!((y - 0.2).abs() < 1e-15);
                assert_eq!(q, BoundaryPoint::Angle(0.0));
            }
            other => panic!("{other:?}"),
        }
        match collar_chart(&d, &[0.0, -0.9]) {
            ChartPoint::Collar { q: BoundaryPoint::Angle(t), .. } => {
                assert!((t - 1.5 * PI).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(collar_chart(&d, &[0.1, 0.1]), ChartPoint::Interior);
    }

    #[test]
    fn foot_point_reconstructs_position() {
        let d = DomainSpec::disk(1.5, 0.4, 16).unwrap();
        let x = [0.3, -1.2];
        if let ChartPoint::Collar { y, q: BoundaryPoint::Angle(t) } = collar_chart(&d, &x) {
            // x = q + y nu(q) with nu the inner normal.
            let foot = [1.5 * t.cos(), 1.5 * t.sin()];
            let rebuilt = [foot[0] - y * t.cos(), foot[1] - y * t.sin()];
            assert!((rebuilt[0] - x[0]).abs() < 1e-14 && (rebuilt[1] - x[1]).abs() < 1e-14);
        } else {
            panic!("expected collar point");
        }
    }

    #[test]
    fn validation() {
        assert!(DomainSpec::interval(2.0, 1.0).is_err());
        assert!(DomainSpec::interval(2.0, 0.0).is_err());
        assert!(DomainSpec::interval(4.0, 1.5).is_err());
        assert!(DomainSpec::disk(1.0, 0.3, 2).is_err());
        assert_eq!(DomainSpec::interval(2.0, 0.5).unwrap().boundary_resolution, 1);
        assert_eq!(DomainSpec::default_collar_depth(6.0), 1.0);
        assert_eq!(DomainSpec::default_collar_depth(1.5), 0.5);
    }
}
