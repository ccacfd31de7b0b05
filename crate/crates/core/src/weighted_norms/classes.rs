use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    ln_region_integral, quadrature::DEFAULT_SPACE_NODES, region_integral, slice_integral,
    Resolution, SpaceTimeField,
};
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

/// Allowed growth of the fitted constant from the upper to the lower half of
/// a sweep.
pub const STABILITY_FACTOR: f64 = 1.1;

/// Result of fitting `lhs(ε) ≤ C bound(ε)` along a decreasing sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub condition: String,
    pub eps_values: Vec<f64>,
    pub lhs_values: Vec<f64>,
    pub bound_values: Vec<f64>,
    /// `ln(lhs / bound)`, finite even when both sides overflow.
    pub ln_ratios: Vec<f64>,
    pub fitted_c: f64,
    pub pass: bool,
    pub exponent_used: f64,
}

impl GrowthReport {
    fn from_ln(
        condition: &str,
        eps_values: Vec<f64>,
        ln_lhs: Vec<f64>,
        ln_bound: Vec<f64>,
        exponent_used: f64,
    ) -> Self {
        let ln_ratios: Vec<f64> = ln_lhs.iter().zip(&ln_bound).map(|(l, b)| l - b).collect();
        let max = |s: &[f64]| s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let split = eps_values.len().div_ceil(2);
        let upper = max(&ln_ratios[..split]);
        let lower = max(&ln_ratios[split..]);
        let pass = lower == f64::NEG_INFINITY || lower <= upper + STABILITY_FACTOR.ln();
        Self {
            condition: condition.to_string(),
            eps_values,
            lhs_values: ln_lhs.iter().map(|l| l.exp()).collect(),
            bound_values: ln_bound.iter().map(|b| b.exp()).collect(),
            fitted_c: max(&ln_ratios).exp(),
            ln_ratios,
            pass,
            exponent_used,
        }
    }

    /// Rows `eps,lhs,bound`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "eps,lhs,bound")?;
        for ((e, l), b) in self
            .eps_values
            .iter()
            .zip(&self.lhs_values)
            .zip(&self.bound_values)
        {
            writeln!(w, "{e},{l},{b}")?;
        }
        Ok(())
    }
}

fn validate_sweep(sweep: &[f64], geom: &DomainGeometry) -> Result<()> {
    if sweep.is_empty() {
        return Err(Error::param("eps_sweep", "empty sweep"));
    }
    if sweep.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::param("eps_sweep", "must be strictly decreasing"));
    }
    if sweep.iter().any(|&e| !(e > 0.0) || e >= geom.eps0) {
        return Err(Error::param(
            "eps_sweep",
            format!("values must lie in (0, {})", geom.eps0),
        ));
    }
    Ok(())
}

fn validate_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::param("T", "must be positive and finite"))
    }
}

/// Fits `∫_0^T ∫_{Ω^ε} |u| ≤ C exp(θ ε^{2-γ})` along the sweep.
pub fn check_supercritical_class(
    u: &dyn SpaceTimeField,
    theta: f64,
    gamma: f64,
    eps_sweep: &[f64],
    geom: &DomainGeometry,
    horizon: f64,
) -> Result<GrowthReport> {
    validate_sweep(eps_sweep, geom)?;
    validate_horizon(horizon)?;
    if !(gamma > 2.0) {
        return Err(Error::param("gamma", "exponential class needs gamma > 2"));
    }
    if !(theta > 0.0) {
        return Err(Error::param("theta", "must be positive"));
    }
    let ln_lhs = eps_sweep
        .par_iter()
        .map(|&e| ln_region_integral(u, geom, e, (0.0, horizon), Resolution::default()))
        .collect::<Result<Vec<_>>>()?;
    let ln_bound = eps_sweep
        .iter()
        .map(|e| theta * e.powf(2.0 - gamma))
        .collect();
    Ok(GrowthReport::from_ln(
        "exponential_class",
        eps_sweep.to_vec(),
        ln_lhs,
        ln_bound,
        theta,
    ))
}

/// Fits `∫_0^T ∫_{ε/2 < d < 2ε/3} |u| d^{γ-2} ≤ C ε^μ` along the sweep.
pub fn check_shell_class(
    u: &dyn SpaceTimeField,
    mu: f64,
    eps_sweep: &[f64],
    geom: &DomainGeometry,
    horizon: f64,
    gamma: f64,
) -> Result<GrowthReport> {
    if !(1.0..=2.0).contains(&gamma) {
        return Err(Error::param("gamma", "shell class needs gamma in [1, 2]"));
    }
    if !(mu > 4.0 - 2.0 * gamma) {
        return Err(Error::Precondition(format!(
            "shell condition needs mu > 4 - 2*gamma = {}, got {mu}",
            4.0 - 2.0 * gamma
        )));
    }
    validate_sweep(eps_sweep, geom)?;
    validate_horizon(horizon)?;
    let lhs = eps_sweep
        .par_iter()
        .map(|&e| {
            region_integral(
                u,
                geom,
                (0.5 * e, 2.0 * e / 3.0),
                (0.0, horizon),
                &|d| d.powf(gamma - 2.0),
                Resolution::default(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrowthReport::from_ln(
        "shell_class",
        eps_sweep.to_vec(),
        lhs.iter().map(|v| v.ln()).collect(),
        eps_sweep.iter().map(|e| mu * e.ln()).collect(),
        mu,
    ))
}

/// `sup |u| d^l` on sample grids at three refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseGrowth {
    pub holds: bool,
    pub c_bar: f64,
    pub levels: Vec<(usize, f64)>,
}

pub const POINTWISE_LEVELS: [usize; 3] = [256, 1024, 4096];

pub fn check_pointwise_growth(
    u: &dyn SpaceTimeField,
    l: f64,
    geom: &DomainGeometry,
    horizon: f64,
) -> Result<PointwiseGrowth> {
    if !(l >= 0.0) {
        return Err(Error::param("l", "must be nonnegative"));
    }
    validate_horizon(horizon)?;
    let h = geom.max_distance();
    let times: Vec<f64> = (0..=8).map(|k| horizon * k as f64 / 8.0).collect();
    let levels = POINTWISE_LEVELS
        .par_iter()
        .map(|&m| {
            let mut sup: f64 = 0.0;
            for j in 0..m {
                let d = h * ((j as f64 + 0.5) / m as f64).powi(2);
                for x in geom.points_at_distance(d) {
                    for &t in &times {
                        let v = u.value(x, t).abs() * d.powf(l);
                        if v.is_nan() {
                            return Err(Error::NonFinite { x, t, value: v });
                        }
                        sup = sup.max(v);
                    }
                }
            }
            Ok((m, sup))
        })
        .collect::<Result<Vec<_>>>()?;
    let first = levels[0].1;
    let last = levels[levels.len() - 1].1;
    let holds = last.is_finite() && last <= STABILITY_FACTOR * first;
    Ok(PointwiseGrowth {
        holds,
        c_bar: last,
        levels,
    })
}

/// Both sides of `∫_{Ω^ε}|w(τ)| ≤ ∫_{Ω^{ε/2}}|w(τ-δ)| + Ĉ ε^μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl IterationCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let slack = 1e-9 * lhs.abs().max(rhs.abs());
        Self {
            holds: lhs <= rhs + slack,
            lhs,
            rhs,
        }
    }
}

pub fn iteration_inequality_check(
    w: &dyn SpaceTimeField,
    eps: f64,
    delta: f64,
    tau: f64,
    mu: f64,
    c_hat: f64,
    geom: &DomainGeometry,
) -> Result<IterationCheck> {
    if tau - delta < 0.0 {
        return Err(Error::param("delta", "tau - delta must be nonnegative"));
    }
    if !(eps > 0.0) || !(delta >= 0.0) || !(c_hat >= 0.0) {
        return Err(Error::param(
            "eps",
            "eps > 0, delta >= 0 and C_hat >= 0 required",
        ));
    }
    let h = geom.max_distance();
    let lhs = slice_integral(w, geom, (eps, h), tau, DEFAULT_SPACE_NODES)?;
    let rhs = slice_integral(w, geom, (0.5 * eps, h), tau - delta, DEFAULT_SPACE_NODES)?;
    Ok(IterationCheck::new(lhs, rhs + c_hat * eps.powf(mu)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weighted_norms::{LogMagnitude, Zero};
    use approx::assert_relative_eq;

    const SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

    fn unit() -> DomainGeometry {
        DomainGeometry::interval(0.0, 1.0).unwrap()
    }

    fn dist(x: f64) -> f64 {
        x.min(1.0 - x)
    }

    #[test]
    fn bounded_field_in_exponential_class() {
        let one = |_: f64, _: f64| 1.0;
        for theta in [1e-3, 1.0, 10.0] {
            let r = check_supercritical_class(&one, theta, 4.0, &SWEEP, &unit(), 1.0).unwrap();
            assert!(r.pass);
            assert!(r.fitted_c <= 1.0);
            for (e, l) in SWEEP.iter().zip(&r.lhs_values) {
                assert_relative_eq!(*l, 1.0 - 2.0 * e, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn exponential_growth_classes() {
        let slow = LogMagnitude(|x: f64, _: f64| 1.0 / dist(x));
        let r = check_supercritical_class(&slow, 2.0, 4.0, &SWEEP, &unit(), 1.0).unwrap();
        assert!(r.pass);
        let fast = LogMagnitude(|x: f64, _: f64| dist(x).powi(-3));
        let r = check_supercritical_class(&fast, 1.0, 4.0, &SWEEP, &unit(), 1.0).unwrap();
        assert!(!r.pass);
        assert!(r.ln_ratios.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn shell_class_examples() {
        let g = unit();
        let r = check_shell_class(&Zero, 0.5, &SWEEP, &g, 1.0, 1.8).unwrap();
        assert!(r.pass);
        assert_eq!(r.fitted_c, 0.0);

        let one = |_: f64, _: f64| 1.0;
        let r = check_shell_class(&one, 1.0, &SWEEP, &g, 1.0, 2.0).unwrap();
        assert!(r.pass);
        for (e, l) in SWEEP.iter().zip(&r.lhs_values) {
            assert_relative_eq!(*l, e / 3.0, max_relative = 1e-12);
        }

        let u = |x: f64, _: f64| dist(x).powf(-0.3);
        let r = check_shell_class(&u, 0.5, &SWEEP, &g, 1.0, 1.8).unwrap();
        assert!(r.pass);
        let c = 4.0 * ((2.0f64 / 3.0).sqrt() - 0.5f64.sqrt());
        assert_relative_eq!(r.fitted_c, c, max_relative = 1e-10);
    }

    #[test]
    fn shell_precondition() {
        let e = check_shell_class(&Zero, 0.3, &SWEEP, &unit(), 1.0, 1.8).unwrap_err();
        assert!(matches!(e, Error::Precondition(_)));
        assert!(check_shell_class(&Zero, 0.5, &[], &unit(), 1.0, 1.8).is_err());
        assert!(check_shell_class(&Zero, 0.5, &[0.1, 0.2], &unit(), 1.0, 1.8).is_err());
    }

    #[test]
    fn pointwise_growth_examples() {
        let g = unit();
        let one = |_: f64, _: f64| 1.0;
        let r = check_pointwise_growth(&one, 0.0, &g, 1.0).unwrap();
        assert!(r.holds);
        assert_eq!(r.c_bar, 1.0);
        let u = |x: f64, _: f64| dist(x).powf(-0.3);
        let r = check_pointwise_growth(&u, 0.3, &g, 1.0).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.c_bar, 1.0, epsilon = 1e-12);
        let u = |x: f64, _: f64| dist(x).powf(-0.5);
        let r = check_pointwise_growth(&u, 0.3, &g, 1.0).unwrap();
        assert!(!r.holds);
    }

    #[test]
    fn iteration_check_examples() {
        let g = unit();
        assert!(
            iteration_inequality_check(&Zero, 0.1, 0.1, 0.5, 1.0, 0.0, &g)
                .unwrap()
                .holds
        );
        let one = |_: f64, _: f64| 1.0;
        let r = iteration_inequality_check(&one, 0.1, 0.1, 0.5, 1.0, 0.0, &g).unwrap();
        assert!(r.holds);
        assert_relative_eq!(r.lhs, 0.8, epsilon = 1e-12);
        assert_relative_eq!(r.rhs, 0.9, epsilon = 1e-12);
        assert!(iteration_inequality_check(&one, 0.1, 0.6, 0.5, 1.0, 0.0, &g).is_err());
    }

    #[test]
    fn growth_report_csv() {
        let one = |_: f64, _: f64| 1.0;
        let r = check_shell_class(&one, 1.0, &SWEEP, &unit(), 1.0, 2.0).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("eps,lhs,bound\n0.2,"));
        assert_eq!(s.lines().count(), 5);
    }
}
