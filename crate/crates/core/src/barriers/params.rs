use serde::{Deserialize, Serialize};

use crate::coefficients::{DegenerateCoefficient, EnvelopeCertificate};
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

use super::Barrier;

/// Envelope and geometry constants feeding the selectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierConstants {
    pub c_tilde0: f64,
    pub c0: f64,
    pub c1: f64,
    pub k0: f64,
    pub nu0: f64,
    /// Upper limit for `ε`.
    pub eps0: f64,
}

impl BarrierConstants {
    pub fn new(c_tilde0: f64, c0: f64, c1: f64, k0: f64, nu0: f64) -> Self {
        Self {
            c_tilde0,
            c0,
            c1,
            k0,
            nu0,
            eps0: f64::INFINITY,
        }
    }

    /// Envelope constants of `coef` and regularity constants of `geom` at `eps`.
    pub fn from_problem(
        coef: &DegenerateCoefficient,
        geom: &DomainGeometry,
        eps: f64,
    ) -> Result<Self> {
        let (c_tilde0, c0, c1) = coef.envelope_constants();
        let (k0, nu0) = geom.regularity_constants(eps)?;
        Ok(Self {
            eps0: geom.eps0,
            ..Self::new(c_tilde0, c0, c1, k0, nu0)
        })
    }

    pub fn from_certificate(cert: &EnvelopeCertificate, k0: f64, nu0: f64, eps0: f64) -> Self {
        Self {
            eps0,
            ..Self::new(cert.c_tilde0, cert.c0, cert.c1, k0, nu0)
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("c_tilde0", self.c_tilde0),
            ("c0", self.c0),
            ("nu0", self.nu0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        for (name, v) in [("c1", self.c1), ("k0", self.k0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Smallest `δ/τ` the selectors accept; below this the time window cannot be
/// sampled meaningfully in double precision.
const MIN_RELATIVE_DELTA: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-10;

/// Supremum of `{c ∈ (0, 1/2) : g(c) < 0}` for increasing `g` with `g(0) < 0`.
fn admissible_sup(g: impl Fn(f64) -> f64) -> f64 {
    if g(0.5) <= 0.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn check_window(delta: f64, tau: f64, inequality: String) -> Result<()> {
    if !(delta > MIN_RELATIVE_DELTA * tau) {
        return Err(Error::InadmissibleConstants {
            inequality: format!("{inequality}; resulting delta = {delta:e} is not resolvable"),
        });
    }
    Ok(())
}

fn check_common(eps: f64, tau: f64, k: &BarrierConstants) -> Result<()> {
    k.validate()?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", "must be positive"));
    }
    if !(eps > 0.0 && eps < k.eps0) {
        return Err(Error::param("eps", format!("must lie in (0, {})", k.eps0)));
    }
    Ok(())
}

/// Barrier for `γ > 2`: `ζ = d^{-β} - ε^{-β}` with `β = (γ-2)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupercriticalBarrier {
    pub gamma: f64,
    pub eps: f64,
    pub tau: f64,
    pub theta: f64,
    pub beta: f64,
    pub c: f64,
    pub sigma: f64,
    pub alpha1: f64,
    pub delta: f64,
    pub s: f64,
    pub constants: BarrierConstants,
}

impl SupercriticalBarrier {
    fn g(gamma: f64, k: &BarrierConstants, c: f64) -> f64 {
        let beta = 0.5 * (gamma - 2.0);
        ((1.0 - c).powf(-beta) - 1.0) * (k.c1 + k.c0 * k.k0) - beta * k.nu0 * k.c_tilde0
    }

    pub fn alpha1_lower_bound(&self) -> f64 {
        let k = &self.constants;
        let g2 = (self.gamma - 2.0).powi(2);
        (10.0 * k.c0 * g2 / self.sigma.powi(2)).max(1.25 * k.c0 * g2)
    }

    pub fn delta_upper_bound(&self) -> f64 {
        let k = &self.constants;
        let a = self.sigma.powi(2) / ((self.gamma - 2.0) * (k.c1 + k.c0));
        let b = (1.5f64.powf(self.beta) - 1.0).powi(2) / (4.0 * self.theta * self.alpha1);
        a.min(self.tau).min(b)
    }

    /// Re-checks every parameter relation.
    pub fn invariants_hold(&self) -> bool {
        let beta = 0.5 * (self.gamma - 2.0);
        self.gamma > 2.0
            && self.beta == beta
            && self.c > 0.0
            && self.c < 0.5
            && Self::g(self.gamma, &self.constants, self.c) < 0.0
            && self.sigma == 1.0 - (1.0 - self.c).powf(beta)
            && self.alpha1 >= self.alpha1_lower_bound()
            && self.delta > 0.0
            && self.delta < self.delta_upper_bound()
            && self.s == self.alpha1 * (self.tau + self.delta)
    }

    /// Same parameters with `α1` overridden (negative controls).
    pub fn with_alpha1(mut self, alpha1: f64) -> Self {
        self.alpha1 = alpha1;
        self.s = alpha1 * (self.tau + self.delta);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self.s = self.alpha1 * (self.tau + delta);
        self
    }
}

impl Barrier for SupercriticalBarrier {
    fn eps(&self) -> f64 {
        self.eps
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn alpha1(&self) -> f64 {
        self.alpha1
    }
    fn s(&self) -> f64 {
        self.s
    }
    fn profile(&self, d: f64) -> (f64, f64, f64) {
        let b = self.beta;
        (
            d.powf(-b) - self.eps.powf(-b),
            -b * d.powf(-b - 1.0),
            b * (b + 1.0) * d.powf(-b - 2.0),
        )
    }
}

pub fn select_supercritical_params(
    gamma: f64,
    constants: BarrierConstants,
    tau: f64,
    theta: f64,
    eps: f64,
) -> Result<SupercriticalBarrier> {
    if !(gamma > 2.0 && gamma.is_finite()) {
        return Err(Error::param(
            "gamma",
            "supercritical barrier needs gamma > 2",
        ));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::param("theta", "must be positive"));
    }
    check_common(eps, tau, &constants)?;
    let k = constants;
    let beta = 0.5 * (gamma - 2.0);
    let sup = admissible_sup(|c| SupercriticalBarrier::g(gamma, &k, c));
    let inequality = format!(
        "[(1-c)^(-{beta}) - 1]·(c1 + c0·k0) < {beta}·nu0·c_tilde0 with c1 + c0·k0 = {}",
        k.c1 + k.c0 * k.k0
    );
    if sup <= BISECTION_TOL {
        return Err(Error::InadmissibleConstants { inequality });
    }
    let c = 0.5 * sup;
    let sigma = 1.0 - (1.0 - c).powf(beta);
    let mut b = SupercriticalBarrier {
        gamma,
        eps,
        tau,
        theta,
        beta,
        c,
        sigma,
        alpha1: 0.0,
        delta: 0.0,
        s: 0.0,
        constants: k,
    };
    b.alpha1 = b.alpha1_lower_bound();
    b.delta = 0.5 * b.delta_upper_bound();
    b.s = b.alpha1 * (tau + b.delta);
    check_window(b.delta, tau, inequality)?;
    debug_assert!(b.invariants_hold());
    Ok(b)
}

/// Barrier for `γ ∈ [1, 2]`: `ζ = ε^β - d^β` with `β = 2-γ` (or `β = b` at
/// `γ = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalBarrier {
    pub gamma: f64,
    pub eps: f64,
    pub tau: f64,
    pub beta: f64,
    pub ell: f64,
    pub sigma_bar: f64,
    pub alpha1: f64,
    pub delta: f64,
    pub s: f64,
    pub constants: BarrierConstants,
}

impl SubcriticalBarrier {
    fn h(beta: f64, k: &BarrierConstants, ell: f64) -> f64 {
        (1.0 - (1.0 - ell).powf(beta)) * (k.c1 + k.c0 * k.k0) - beta * k.nu0 * k.c_tilde0
    }

    pub fn alpha1_lower_bound(&self) -> f64 {
        let k = &self.constants;
        let b2 = self.beta.powi(2);
        (40.0 * k.c0 * b2 / self.sigma_bar.powi(2)).max(5.0 * k.c0 * b2)
    }

    pub fn delta_upper_bound(&self) -> f64 {
        let k = &self.constants;
        let sb2 = self.sigma_bar.powi(2);
        let first = if self.gamma < 2.0 {
            sb2 * self.eps.powf(4.0 - 2.0 * self.gamma)
                / (16.0 * (2.0 - self.gamma) * (k.c1 + k.c0))
        } else {
            let b = self.beta;
            sb2 / (16.0 * b * (k.c1 + (b - 1.0).max(0.0) + k.c0))
        };
        first.min(self.tau)
    }

    pub fn invariants_hold(&self) -> bool {
        (1.0..=2.0).contains(&self.gamma)
            && self.beta > 0.0
            && (self.gamma == 2.0 || self.beta == 2.0 - self.gamma)
            && self.ell > 0.0
            && self.ell < 0.5
            && Self::h(self.beta, &self.constants, self.ell) < 0.0
            && self.sigma_bar == 1.0 - (1.0 - self.ell).powf(self.beta)
            && self.alpha1 >= self.alpha1_lower_bound()
            && self.delta > 0.0
            && self.delta < self.delta_upper_bound()
            && self.s == self.alpha1 * (self.tau + self.delta)
    }

    pub fn with_alpha1(mut self, alpha1: f64) -> Self {
        self.alpha1 = alpha1;
        self.s = alpha1 * (self.tau + self.delta);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self.s = self.alpha1 * (self.tau + delta);
        self
    }
}

impl Barrier for SubcriticalBarrier {
    fn eps(&self) -> f64 {
        self.eps
    }
    fn tau(&self) -> f64 {
        self.tau
    }
    fn delta(&self) -> f64 {
        self.delta
    }
    fn alpha1(&self) -> f64 {
        self.alpha1
    }
    fn s(&self) -> f64 {
        self.s
    }
    fn profile(&self, d: f64) -> (f64, f64, f64) {
        let b = self.beta;
        (
            self.eps.powf(b) - d.powf(b),
            -b * d.powf(b - 1.0),
            -b * (b - 1.0) * d.powf(b - 2.0),
        )
    }
}

/// `b` is the exponent used at `γ = 2` (default 1); ignored otherwise.
pub fn select_subcritical_params(
    gamma: f64,
    constants: BarrierConstants,
    tau: f64,
    eps: f64,
    b: Option<f64>,
) -> Result<SubcriticalBarrier> {
    if !(1.0..=2.0).contains(&gamma) {
        return Err(Error::param(
            "gamma",
            "subcritical barrier needs gamma in [1, 2]",
        ));
    }
    check_common(eps, tau, &constants)?;
    let beta = if gamma == 2.0 {
        let b = b.unwrap_or(1.0);
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param("b", "must be positive"));
        }
        b
    } else {
        2.0 - gamma
    };
    let k = constants;
    let sup = admissible_sup(|l| SubcriticalBarrier::h(beta, &k, l));
    let inequality = format!(
        "[1 - (1-l)^{beta}]·(c1 + c0·k0) < {beta}·nu0·c_tilde0 with c1 + c0·k0 = {}",
        k.c1 + k.c0 * k.k0
    );
    if sup <= BISECTION_TOL {
        return Err(Error::InadmissibleConstants { inequality });
    }
    let ell = 0.5 * sup;
    let sigma_bar = 1.0 - (1.0 - ell).powf(beta);
    let mut out = SubcriticalBarrier {
        gamma,
        eps,
        tau,
        beta,
        ell,
        sigma_bar,
        alpha1: 0.0,
        delta: 0.0,
        s: 0.0,
        constants: k,
    };
    out.alpha1 = out.alpha1_lower_bound();
    out.delta = 0.5 * out.delta_upper_bound();
    out.s = out.alpha1 * (tau + out.delta);
    check_window(out.delta, tau, inequality)?;
    debug_assert!(out.invariants_hold());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_constants() -> BarrierConstants {
        BarrierConstants::new(1.0, 1.0, 1.0, 0.0, 1.0)
    }

    #[test]
    fn supercritical_gamma4_example() {
        let b = select_supercritical_params(4.0, unit_constants(), 1.0, 1.0, 0.1).unwrap();
        assert_eq!(b.beta, 1.0);
        assert_relative_eq!(b.c, 0.25, epsilon = 1e-12);
        assert_relative_eq!(b.sigma, 0.25, epsilon = 1e-12);
        assert_relative_eq!(b.alpha1, 640.0, epsilon = 1e-9);
        assert_relative_eq!(b.delta, 0.5 * 0.25 / (4.0 * 640.0), max_relative = 1e-12);
        assert_relative_eq!(b.delta, 4.8828125e-5, max_relative = 1e-9);
        assert!(b.invariants_hold());
    }

    #[test]
    fn supercritical_gamma3_caps_at_half() {
        let b = select_supercritical_params(3.0, unit_constants(), 1.0, 1.0, 0.1).unwrap();
        assert_eq!(b.beta, 0.5);
        assert_relative_eq!(b.c, 0.25, epsilon = 1e-12);
        assert!(b.invariants_hold());
    }

    #[test]
    fn supercritical_bisection_matches_closed_form_root() {
        // (1-c)^{-1/2} - 1 = 0.5 / 2  =>  c = 1 - 1/1.25²
        let k = BarrierConstants::new(1.0, 1.0, 2.0, 0.0, 1.0);
        let b = select_supercritical_params(3.0, k, 1.0, 1.0, 0.1).unwrap();
        let root = 1.0 - 1.0 / 1.25f64.powi(2);
        assert!(root < 0.5);
        assert!((2.0 * b.c - root).abs() < 2e-10);
    }

    #[test]
    fn huge_k0_is_inadmissible() {
        let k = BarrierConstants::new(1.0, 1.0, 1.0, 1e6, 1.0);
        assert!(matches!(
            select_supercritical_params(4.0, k, 1.0, 1.0, 0.1),
            Err(Error::InadmissibleConstants { .. })
        ));
    }

    #[test]
    fn subcritical_gamma1_example() {
        let b = select_subcritical_params(1.0, unit_constants(), 1.0, 0.1, None).unwrap();
        assert_eq!(b.beta, 1.0);
        assert_relative_eq!(b.ell, 0.25, epsilon = 1e-12);
        assert_relative_eq!(b.sigma_bar, 0.25, epsilon = 1e-12);
        assert_relative_eq!(b.alpha1, 640.0, epsilon = 1e-9);
        assert_relative_eq!(b.delta, 0.5 * 0.0625 * 0.01 / 32.0, max_relative = 1e-12);
        assert_relative_eq!(b.delta, 9.765625e-6, max_relative = 1e-9);
        assert!(b.invariants_hold());
    }

    #[test]
    fn subcritical_gamma2_example() {
        let b = select_subcritical_params(2.0, unit_constants(), 1.0, 0.1, Some(1.0)).unwrap();
        assert_relative_eq!(b.delta, 0.5 * 0.0625 / 32.0, max_relative = 1e-12);
        assert_relative_eq!(b.alpha1, 640.0, epsilon = 1e-9);
        assert!(b.invariants_hold());
    }

    #[test]
    fn subcritical_small_beta_still_admissible() {
        let b = select_subcritical_params(1.99, unit_constants(), 1.0, 0.1, None).unwrap();
        assert_relative_eq!(b.beta, 0.01, epsilon = 1e-12);
        assert!(b.ell > 0.0 && b.invariants_hold());
    }

    #[test]
    fn selectors_reject_bad_gamma_and_eps() {
        assert!(select_supercritical_params(2.0, unit_constants(), 1.0, 1.0, 0.1).is_err());
        assert!(select_subcritical_params(2.5, unit_constants(), 1.0, 0.1, None).is_err());
        let mut k = unit_constants();
        k.eps0 = 0.05;
        assert!(select_subcritical_params(1.5, k, 1.0, 0.1, None).is_err());
    }

    proptest! {
        #[test]
        fn supercritical_selector_satisfies_invariants(
            gamma in 2.05f64..8.0,
            c0 in 0.2f64..5.0,
            ct in 0.1f64..1.0,
            c1 in 0.0f64..5.0,
            k0 in 0.0f64..5.0,
            tau in 0.1f64..5.0,
            theta in 0.1f64..5.0,
        ) {
            let k = BarrierConstants::new(ct * c0, c0, c1, k0, 1.0);
            if let Ok(b) = select_supercritical_params(gamma, k, tau, theta, 0.1) {
                prop_assert!(b.invariants_hold());
            }
        }

        #[test]
        fn subcritical_selector_satisfies_invariants(
            gamma in 1.0f64..2.0,
            c0 in 0.2f64..5.0,
            c1 in 0.0f64..5.0,
            k0 in 0.0f64..5.0,
            eps in 0.01f64..0.4,
        ) {
            let k = BarrierConstants::new(0.5 * c0, c0, c1, k0, 1.0);
            if let Ok(b) = select_subcritical_params(gamma, k, 1.0, eps, None) {
                prop_assert!(b.invariants_hold());
            }
        }
    }
}
