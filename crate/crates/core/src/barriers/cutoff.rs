use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

/// `S(t) = 6t⁵ - 15t⁴ + 10t³` on `[0, 1]`.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t = t.clamp(0.0, 1.0);
    let t2 = t * t;
    (
        t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (t - 1.0) * (t - 1.0),
        60.0 * t * (2.0 * t - 1.0) * (t - 1.0),
    )
}

/// `max S' = 15/8` at `t = 1/2`.
const MAX_SLOPE: f64 = 1.875;

/// `max |S''| = 10/√3` at `t = (3 ± √3)/6`.
fn max_curvature() -> f64 {
    10.0 / 3f64.sqrt()
}

/// Smooth cutoff: `0` for `d <= ε/2`, `1` for `d >= 2ε/3`, quintic ramp in
/// between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub eps: f64,
}

/// Derivative bounds `(A1, A2)` with `|η'| <= A1/ε`, `|η''| <= A2/ε²`.
pub fn cutoff_constants(_cutoff: &CutoffFunction) -> (f64, f64) {
    (6.0 * MAX_SLOPE, 36.0 * max_curvature())
}

impl CutoffFunction {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::param("eps", "must be positive"));
        }
        Ok(Self { eps })
    }

    pub fn constants(&self) -> (f64, f64) {
        cutoff_constants(self)
    }

    /// `(η, dη/dd, d²η/dd²)` as functions of the distance.
    pub fn profile(&self, d: f64) -> (f64, f64, f64) {
        let lo = 0.5 * self.eps;
        let width = self.eps / 6.0;
        if d <= lo {
            return (0.0, 0.0, 0.0);
        }
        if d >= lo + width {
            return (1.0, 0.0, 0.0);
        }
        let (s, s1, s2) = smoothstep((d - lo) / width);
        (s, s1 / width, s2 / (width * width))
    }

    /// `(η, ∂η, Δη)` at `x` (gradient as a coordinate component).
    pub fn eval(&self, geom: &DomainGeometry, x: f64) -> Result<(f64, f64, f64)> {
        let d = geom.distance(x)?;
        let (e, e1, e2) = self.profile(d);
        if e1 == 0.0 && e2 == 0.0 {
            return Ok((e, 0.0, 0.0));
        }
        let g = geom.grad_distance(x)?;
        let lap = geom.laplacian_distance(x)?;
        Ok((e, e1 * g, e2 * g * g + e1 * lap))
    }
}
