//! Domains with a closed-form distance-to-boundary field.
//!
//! Two geometries are supported: a 1-D interval and the radial reduction of
//! an n-ball. In both cases `d`, `∇d` and `Δd` are exact, so nothing built on
//! top of them carries distance-field approximation error.
//!
//! Points are scalar coordinates: `x` for the interval, the radius `r` for the
//! disk. Gradients are returned as the single component along that axis.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Interval {
        x_lo: f64,
        x_hi: f64,
    },
    /// Radially symmetric n-ball of radius `radius`, n >= 2.
    DiskRadial {
        radius: f64,
        n: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainGeometry {
    pub kind: DomainKind,
    /// Boundary-layer width below which `d` is smooth.
    pub eps0: f64,
    /// Bound on `|Δd|` over the `eps0` boundary layer.
    pub k0: f64,
    /// Lower bound on `|∇d|` over the `eps0` boundary layer.
    pub nu0: f64,
}

/// Where a point sits relative to the cutoff shell `Ω^{ε/2} \ Ω^{2ε/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellRegion {
    /// `d > 2ε/3`
    Inner,
    /// `ε/2 < d <= 2ε/3`
    Shell,
    /// `d <= ε/2`
    Outer,
}

impl DomainGeometry {
    pub fn interval(x_lo: f64, x_hi: f64) -> Result<Self> {
        if !(x_lo.is_finite() && x_hi.is_finite() && x_hi > x_lo) {
            return Err(Error::param("geometry", "interval needs x_lo < x_hi"));
        }
        let half = 0.5 * (x_hi - x_lo);
        Self::with_eps0(DomainKind::Interval { x_lo, x_hi }, (0.49 * half).min(0.99))
    }

    pub fn disk_radial(radius: f64, n: u32) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param("geometry", "disk radius must be positive"));
        }
        if n < 2 {
            return Err(Error::param("geometry", "disk dimension must be >= 2"));
        }
        Self::with_eps0(
            DomainKind::DiskRadial { radius, n },
            (0.9 * radius).min(0.99),
        )
    }

    /// Builds a geometry with an explicit boundary-layer width.
    pub fn with_eps0(kind: DomainKind, eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::param("eps0", "must lie in (0, 1)"));
        }
        if eps0 >= kind.max_distance() {
            return Err(Error::param("eps0", "must be smaller than the inradius"));
        }
        let (k0, nu0) = kind.layer_constants(eps0);
        Ok(Self {
            kind,
            eps0,
            k0,
            nu0,
        })
    }

    /// Largest value of `d` over the domain (the inradius).
    pub fn max_distance(&self) -> f64 {
        self.kind.max_distance()
    }

    /// Lebesgue measure of Ω (n-dimensional volume for the disk).
    pub fn measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { x_lo, x_hi } => x_hi - x_lo,
            DomainKind::DiskRadial { radius, n } => unit_ball_volume(n) * radius.powi(n as i32),
        }
    }

    /// Endpoints of the coordinate range `[lo, hi]`.
    pub fn coordinate_range(&self) -> (f64, f64) {
        match self.kind {
            DomainKind::Interval { x_lo, x_hi } => (x_lo, x_hi),
            DomainKind::DiskRadial { radius, .. } => (0.0, radius),
        }
    }

    pub fn distance(&self, x: f64) -> Result<f64> {
        match self.kind {
            DomainKind::Interval { x_lo, x_hi } => {
                if !(x >= x_lo && x <= x_hi) {
                    return Err(Error::Domain { x });
                }
                Ok((x - x_lo).min(x_hi - x))
            }
            DomainKind::DiskRadial { radius, .. } => {
                if !(x >= 0.0 && x <= radius) {
                    return Err(Error::Domain { x });
                }
                Ok(radius - x)
            }
        }
    }

    /// Component of `∇d` along the coordinate axis.
    pub fn grad_distance(&self, x: f64) -> Result<f64> {
        self.distance(x)?;
        match self.kind {
            DomainKind::Interval { x_lo, x_hi } => {
                let mid = 0.5 * (x_lo + x_hi);
                if x == mid {
                    Err(Error::NondifferentiablePoint { x })
                } else if x < mid {
                    Ok(1.0)
                } else {
                    Ok(-1.0)
                }
            }
            DomainKind::DiskRadial { .. } => {
                if x == 0.0 {
                    Err(Error::NondifferentiablePoint { x })
                } else {
                    Ok(-1.0)
                }
            }
        }
    }

    pub fn laplacian_distance(&self, x: f64) -> Result<f64> {
        self.distance(x)?;
        match self.kind {
            DomainKind::Interval { x_lo, x_hi } => {
                if x == 0.5 * (x_lo + x_hi) {
                    Err(Error::NondifferentiablePoint { x })
                } else {
                    Ok(0.0)
                }
            }
            DomainKind::DiskRadial { n, .. } => {
                if x == 0.0 {
                    Err(Error::Singularity {
                        x,
                        what: "Laplacian of the distance at the disk center",
                    })
                } else {
                    Ok(-((n - 1) as f64) / x)
                }
            }
        }
    }

    /// `(k0, nu0)` over the layer `Ω \ Ω^eps`, for `0 < eps < eps0`.
    pub fn regularity_constants(&self, eps: f64) -> Result<(f64, f64)> {
        if !(eps > 0.0 && eps < self.eps0) {
            return Err(Error::param(
                "eps",
                format!("must lie in (0, eps0 = {})", self.eps0),
            ));
        }
        Ok(self.kind.layer_constants(eps))
    }

    /// Membership in `Ω^eps = {d > eps}`. Points outside the closure are not
    /// in any interior set.
    pub fn in_interior_set(&self, x: f64, eps: f64) -> bool {
        self.distance(x).map(|d| d > eps).unwrap_or(false)
    }

    pub fn shell_membership(&self, x: f64, eps: f64) -> ShellRegion {
        let d = self.distance(x).unwrap_or(0.0);
        if d > 2.0 * eps / 3.0 {
            ShellRegion::Inner
        } else if d > 0.5 * eps {
            ShellRegion::Shell
        } else {
            ShellRegion::Outer
        }
    }

    /// Coordinates of the points where `d` equals `dist`, in increasing order.
    /// Empty when `dist` exceeds the inradius.
    pub fn points_at_distance(&self, dist: f64) -> Vec<f64> {
        match self.kind {
            DomainKind::Interval { x_lo, x_hi } => {
                let half = 0.5 * (x_hi - x_lo);
                if dist < 0.0 || dist > half {
                    vec![]
                } else if dist == half {
                    vec![x_lo + half]
                } else {
                    vec![x_lo + dist, x_hi - dist]
                }
            }
            DomainKind::DiskRadial { radius, .. } => {
                if dist < 0.0 || dist > radius {
                    vec![]
                } else {
                    vec![radius - dist]
                }
            }
        }
    }

    /// True for the measure-zero set where `∇d` is undefined.
    pub fn is_ridge(&self, x: f64) -> bool {
        match self.kind {
            DomainKind::Interval { x_lo, x_hi } => x == 0.5 * (x_lo + x_hi),
            DomainKind::DiskRadial { .. } => x == 0.0,
        }
    }
}

impl DomainKind {
    fn max_distance(&self) -> f64 {
        match *self {
            DomainKind::Interval { x_lo, x_hi } => 0.5 * (x_hi - x_lo),
            DomainKind::DiskRadial { radius, .. } => radius,
        }
    }

    fn layer_constants(&self, eps: f64) -> (f64, f64) {
        match *self {
            DomainKind::Interval { .. } => (0.0, 1.0),
            // sup of (n-1)/r over r in (R - eps, R)
            DomainKind::DiskRadial { radius, n } => ((n - 1) as f64 / (radius - eps), 1.0),
        }
    }
}

/// Volume of the unit n-ball.
pub fn unit_ball_volume(n: u32) -> f64 {
    // V_n = 2π/n · V_{n-2}, V_0 = 1, V_1 = 2
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Surface area of the unit (n-1)-sphere, `n · V_n`.
pub fn unit_sphere_area(n: u32) -> f64 {
    n as f64 * unit_ball_volume(n)
}
