//! Cutoff, boundary weight and stretched collar coordinate.
//!
//! On the collar `0 < y <= eps` (with `y` the distance to the boundary) the
//! weight is `r(y) = chi(y) y + 1 - chi(y)`, where `chi` is a smooth cutoff equal
//! to one on `[0, eps/3]` and zero on `[2 eps/3, eps]`. The stretched coordinate
//!
//! ```text
//! tau(y) = \int_y^eps r(sigma)^{-s} d sigma
//! ```
//!
//! maps the collar onto the half line `[0, inf)`; in `tau` the degenerate
//! operator is uniformly elliptic and its volume element is `d tau`.

use serde::{Deserialize, Serialize};

use crate::quadrature;
use crate::{Error, Result};

const QUAD_TOL: f64 = 1e-14;

/// Whether the degenerate weight is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `r` built from the cutoff; the flux degenerates at the boundary.
    Degenerate,
    /// `r == 1`; the collar carries the classical operator and `tau = eps - y`.
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    epsilon: f64,
    s: f64,
    kind: WeightKind,
    /// `tau(eps/3)`, the depth at which the exact-distance zone begins.
    tau_exact: f64,
}

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn bump_edge(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl WeightProfile {
    pub fn new(epsilon: f64, s: f64) -> Result<Self> {
        Self::validate(epsilon, s)?;
        let mut profile = WeightProfile {
            epsilon,
            s,
            kind: WeightKind::Degenerate,
            tau_exact: 0.0,
        };
        let third = epsilon / 3.0;
        profile.tau_exact = third + profile.blend_integral(third);
        Ok(profile)
    }

    /// Profile with `r == 1`: the degenerate machinery is switched off.
    pub fn flat(epsilon: f64) -> Result<Self> {
        Self::validate(epsilon, 1.0)?;
        Ok(WeightProfile {
            epsilon,
            s: 1.0,
            kind: WeightKind::Flat,
            tau_exact: 2.0 * epsilon / 3.0,
        })
    }

    fn validate(epsilon: f64, s: f64) -> Result<()> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::ParameterDomain(format!(
                "collar depth must lie in (0, 1], got {epsilon}"
            )));
        }
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "degeneracy exponent s must satisfy 1 <= s < inf, got {s}"
            )));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    /// Same collar with a different exponent (per-species degeneracy).
    pub fn with_s(&self, s: f64) -> Result<Self> {
        match self.kind {
            WeightKind::Degenerate => Self::new(self.epsilon, s),
            WeightKind::Flat => Self::flat(self.epsilon),
        }
    }

    /// Smooth cutoff: 1 on `[0, eps/3]`, 0 on `[2eps/3, eps]`.
    pub fn chi(&self, y: f64) -> f64 {
        let third = self.epsilon / 3.0;
        let rising = bump_edge((y - third) / third);
        let falling = bump_edge((2.0 * third - y) / third);
        falling / (rising + falling)
    }

    pub fn r(&self, y: f64) -> f64 {
        match self.kind {
            WeightKind::Flat => 1.0,
            WeightKind::Degenerate => {
                let third = self.epsilon / 3.0;
                if y <= third {
                    y
                } else if y >= 2.0 * third {
                    1.0
                } else {
                    let c = self.chi(y);
                    c * y + 1.0 - c
                }
            }
        }
    }

    /// `r(y)^s`.
    pub fn r_pow_s(&self, y: f64) -> f64 {
        match self.kind {
            WeightKind::Flat => 1.0,
            WeightKind::Degenerate => self.r(y).powf(self.s),
        }
    }

    /// Depth of the start of the exact-distance zone, `tau(eps/3)`.
    pub fn tau_exact_zone(&self) -> f64 {
        self.tau_exact
    }

    /// `\int_y^{2eps/3} r^{-s}` for `y` in the blend zone.
    fn blend_integral(&self, y: f64) -> f64 {
        let upper = 2.0 * self.epsilon / 3.0;
        quadrature::integrate(|sigma| self.r(sigma).powf(-self.s), y, upper, QUAD_TOL)
    }

    /// `\int_y^{eps/3} sigma^{-s} d sigma` for `0 < y <= eps/3`.
    fn exact_zone_integral(&self, y: f64) -> f64 {
        let third = self.epsilon / 3.0;
        if self.s == 1.0 {
            (third / y).ln()
        } else {
            (y.powf(1.0 - self.s) - third.powf(1.0 - self.s)) / (self.s - 1.0)
        }
    }

    /// Stretched coordinate; `tau(eps) = 0`, `dtau/dy = -r^{-s}`.
    pub fn tau_of_y(&self, y: f64) -> f64 {
        let eps = self.epsilon;
        let third = eps / 3.0;
        match self.kind {
            WeightKind::Flat => eps - y,
            WeightKind::Degenerate => {
                if y <= 0.0 {
                    f64::INFINITY
                } else if y >= 2.0 * third {
                    eps - y
                } else if y > third {
                    third + self.blend_integral(y)
                } else {
                    self.tau_exact + self.exact_zone_integral(y)
                }
            }
        }
    }

    /// Inverse of [`Self::tau_of_y`] on `[0, inf)`.
    pub fn y_of_tau(&self, tau: f64) -> f64 {
        let eps = self.epsilon;
        let third = eps / 3.0;
        if self.kind == WeightKind::Flat || tau <= third {
            return eps - tau;
        }
        if tau >= self.tau_exact {
            let excess = tau - self.tau_exact;
            return if self.s == 1.0 {
                third * (-excess).exp()
            } else {
                ((self.s - 1.0) * excess + third.powf(1.0 - self.s)).powf(1.0 / (1.0 - self.s))
            };
        }
        // Blend zone: safeguarded Newton on tau(y) - tau, which is decreasing in y.
        let (mut lo, mut hi) = (third, 2.0 * third);
        let mut y = third + (2.0 * third - third) * (self.tau_exact - tau) / (self.tau_exact - third);
        for _ in 0..100 {
            let residual = self.tau_of_y(y) - tau;
            if residual.abs() <= 1e-15 * tau.max(1.0) {
                break;
            }
            if residual > 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let slope = -self.r(y).powf(-self.s);
            let mut next = y - residual / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() <= 1e-16 * y {
                y = next;
                break;
            }
            y = next;
        }
        y
    }
}
