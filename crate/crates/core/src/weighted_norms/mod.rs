//! Weighted `L¹` integrals, growth-class checks and telescoping schedules.

mod classes;
mod field;
mod mass;
pub mod quadrature;
mod schedule;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

pub use classes::{
    check_pointwise_growth, check_shell_class, check_supercritical_class,
    iteration_inequality_check, GrowthReport, IterationCheck, PointwiseGrowth,
};
pub use field::{LogMagnitude, SpaceTimeField, Zero};
pub use mass::SliceMass;
pub use quadrature::{DEFAULT_SPACE_NODES, DEFAULT_TIME_PANELS};
pub use schedule::{
    geometric_schedule, partial_zeta, telescoping_schedule, zeta, Rung, Rungs, ScheduleKind,
    TelescopingSchedule, ENUMERATION_LIMIT,
};

/// Boundary weight `φ(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFunction {
    /// `exp(-θ d^{2-γ})`, `γ > 2`.
    ExpInversePower {
        theta: f64,
        gamma: f64,
    },
    /// `d^exponent`.
    Power {
        exponent: f64,
    },
    Constant,
}

impl WeightFunction {
    pub fn exp_inverse_power(theta: f64, gamma: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::param("theta", "must be positive"));
        }
        if !(gamma > 2.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", "exponential weight needs gamma > 2"));
        }
        Ok(Self::ExpInversePower { theta, gamma })
    }

    pub fn power(exponent: f64) -> Result<Self> {
        if !exponent.is_finite() {
            return Err(Error::param("exponent", "must be finite"));
        }
        Ok(Self::Power { exponent })
    }

    pub fn eval(&self, d: f64) -> f64 {
        match *self {
            Self::ExpInversePower { theta, gamma } => (-theta * d.powf(2.0 - gamma)).exp(),
            Self::Power { exponent } => d.powf(exponent),
            Self::Constant => 1.0,
        }
    }
}

/// Quadrature resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub space_nodes: usize,
    pub time_panels: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            space_nodes: DEFAULT_SPACE_NODES,
            time_panels: DEFAULT_TIME_PANELS,
        }
    }
}

fn checked(x: f64, t: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { x, t, value })
    }
}

/// `∫_{t0}^{t1} ∫_{d_lo < d < d_hi} |u| w(d) dx dt`.
pub fn region_integral(
    u: &dyn SpaceTimeField,
    geom: &DomainGeometry,
    (d_lo, d_hi): (f64, f64),
    (t0, t1): (f64, f64),
    weight: &(dyn Fn(f64) -> f64 + Sync),
    res: Resolution,
) -> Result<f64> {
    let space = quadrature::region_rule(geom, d_lo, d_hi, res.space_nodes);
    let time = quadrature::time_rule(t0, t1, res.time_panels);
    let space_w: Vec<f64> = space.iter().map(|p| p.w * weight(p.d)).collect();
    time.par_iter()
        .map(|&(t, wt)| {
            let mut s = 0.0;
            for (p, w) in space.iter().zip(&space_w) {
                let v = checked(p.x, t, u.value(p.x, t).abs() * w)?;
                s += v;
            }
            Ok(wt * s)
        })
        .collect::<Result<Vec<f64>>>()
        .map(|parts| parts.iter().sum())
}

/// `∫_{d_lo < d < d_hi} |u(x, t)| dx`.
pub fn slice_integral(
    u: &dyn SpaceTimeField,
    geom: &DomainGeometry,
    (d_lo, d_hi): (f64, f64),
    t: f64,
    space_nodes: usize,
) -> Result<f64> {
    let space = quadrature::region_rule(geom, d_lo, d_hi, space_nodes);
    let mut s = 0.0;
    for p in &space {
        s += checked(p.x, t, u.value(p.x, t).abs() * p.w)?;
    }
    Ok(s)
}

/// `ln ∫_{t0}^{t1} ∫_{d > d_lo} |u| dx dt`, accumulated in log space.
pub fn ln_region_integral(
    u: &dyn SpaceTimeField,
    geom: &DomainGeometry,
    d_lo: f64,
    (t0, t1): (f64, f64),
    res: Resolution,
) -> Result<f64> {
    let space = quadrature::region_rule(geom, d_lo, f64::INFINITY, res.space_nodes);
    let time = quadrature::time_rule(t0, t1, res.time_panels);
    let mut terms = Vec::with_capacity(space.len() * time.len());
    for &(t, wt) in &time {
        for p in &space {
            let l = u.ln_abs(p.x, t);
            if l.is_nan() || l == f64::INFINITY {
                return Err(Error::NonFinite {
                    x: p.x,
                    t,
                    value: l,
                });
            }
            terms.push(l + (wt * p.w).ln());
        }
    }
    Ok(log_sum_exp(&terms))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// `∫_0^T ∫_Ω |u| φ dx dt`.
pub fn weighted_l1(
    u: &dyn SpaceTimeField,
    weight: &WeightFunction,
    geom: &DomainGeometry,
    horizon: f64,
) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::param("T", "must be positive"));
    }
    region_integral(
        u,
        geom,
        (0.0, geom.max_distance()),
        (0.0, horizon),
        &|d| weight.eval(d),
        Resolution::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> DomainGeometry {
        DomainGeometry::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_and_unit_mass() {
        let g = unit();
        assert_eq!(
            weighted_l1(&Zero, &WeightFunction::Constant, &g, 1.0).unwrap(),
            0.0
        );
        let one = |_: f64, _: f64| 1.0;
        let m = weighted_l1(&one, &WeightFunction::Constant, &g, 1.0).unwrap();
        assert_relative_eq!(m, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_square_root_weight() {
        let one = |_: f64, _: f64| 1.0;
        let w = WeightFunction::power(-0.5).unwrap();
        let m = weighted_l1(&one, &w, &unit(), 1.0).unwrap();
        assert_relative_eq!(m, 2.0 * 2f64.sqrt(), epsilon = 1e-7);
    }

    #[test]
    fn linear_fields_exact() {
        let u = |x: f64, t: f64| 1.0 + 2.0 * x + 3.0 * t;
        let m = weighted_l1(&u, &WeightFunction::Constant, &unit(), 2.0).unwrap();
        // ∫_0^2 ∫_0^1 (1 + 2x + 3t) = 2 + 2 + 6
        assert_relative_eq!(m, 10.0, epsilon = 1e-10);
    }

    #[test]
    fn exp_weight_vanishes_at_boundary() {
        let w = WeightFunction::exp_inverse_power(1.0, 4.0).unwrap();
        assert!(w.eval(0.01) < 1e-300);
        assert!(w.eval(0.4) > 0.0);
        assert!(WeightFunction::exp_inverse_power(1.0, 2.0).is_err());
    }

    #[test]
    fn non_finite_sample_reported() {
        let u = |x: f64, _: f64| if x > 0.7 { f64::NAN } else { 0.0 };
        let e = weighted_l1(&u, &WeightFunction::Constant, &unit(), 1.0).unwrap_err();
        assert!(matches!(e, Error::NonFinite { .. }));
    }

    #[test]
    fn log_space_matches_direct() {
        let u = |x: f64, _: f64| x * x;
        let g = unit();
        let res = Resolution::default();
        let direct = region_integral(&u, &g, (0.1, 1.0), (0.0, 1.0), &|_| 1.0, res).unwrap();
        let ln = ln_region_integral(&u, &g, 0.1, (0.0, 1.0), res).unwrap();
        assert_relative_eq!(ln.exp(), direct, max_relative = 1e-12);
    }
}
