//! Barrier functions `ξ = -ζ²/(2(s - α1 t))`, the cutoff `η_ε`, the
//! regularizer `ψ_α`, parameter selection and sampled certification.

mod certify;
mod cutoff;
mod params;

use serde::{Deserialize, Serialize};

use crate::coefficients::DegenerateCoefficient;
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

pub use certify::{
    normal_derivative_check, verify_d1, verify_d2, verify_e1, verify_e2, SampleGrid,
    CLAIM_TOLERANCE,
};
pub use cutoff::{cutoff_constants, CutoffFunction};
pub use params::{
    select_subcritical_params, select_supercritical_params, BarrierConstants, SubcriticalBarrier,
    SupercriticalBarrier,
};

/// Analytic derivatives of `ξ` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiDerivatives {
    pub dt_xi: f64,
    /// Component of `∇ξ` along the coordinate axis.
    pub grad_xi: f64,
    pub div_a_grad_xi: f64,
    /// Set when `d(x) = ε`; values are those of the outer side `d < ε`.
    pub on_interface: bool,
}

impl XiDerivatives {
    /// `∂tξ + (5/2)a|∇ξ|² + div(a∇ξ)`, the quantity required to be `<= 0`.
    pub fn claim_value(&self, a: f64) -> f64 {
        self.dt_xi + 2.5 * a * self.grad_xi * self.grad_xi + self.div_a_grad_xi
    }
}

/// Shared structure of both barrier families.
pub trait Barrier {
    fn eps(&self) -> f64;
    fn tau(&self) -> f64;
    fn delta(&self) -> f64;
    fn alpha1(&self) -> f64;
    /// `s = α1(τ + δ)`.
    fn s(&self) -> f64;
    /// `(ζ, ζ', ζ'')` as functions of the distance, valid for `d <= ε`.
    fn profile(&self, d: f64) -> (f64, f64, f64);

    fn denominator(&self, t: f64) -> Result<f64> {
        let den = self.s() - self.alpha1() * t;
        if den == 0.0 {
            return Err(Error::SingularTime { t });
        }
        Ok(den)
    }

    fn eval_zeta(&self, geom: &DomainGeometry, x: f64) -> Result<f64> {
        let d = geom.distance(x)?;
        if d > self.eps() {
            return Ok(0.0);
        }
        if d == 0.0 {
            return Err(Error::Singularity {
                x,
                what: "barrier profile on the boundary",
            });
        }
        Ok(self.profile(d).0)
    }

    fn eval_xi(&self, geom: &DomainGeometry, x: f64, t: f64) -> Result<f64> {
        let den = self.denominator(t)?;
        let z = self.eval_zeta(geom, x)?;
        Ok(-z * z / (2.0 * den))
    }

    fn eval_xi_derivatives(
        &self,
        coef: &DegenerateCoefficient,
        geom: &DomainGeometry,
        x: f64,
        t: f64,
    ) -> Result<XiDerivatives> {
        let den = self.denominator(t)?;
        let d = geom.distance(x)?;
        if d > self.eps() {
            return Ok(XiDerivatives {
                dt_xi: 0.0,
                grad_xi: 0.0,
                div_a_grad_xi: 0.0,
                on_interface: false,
            });
        }
        let on_interface = d == self.eps();
        let (z, z1, z2) = self.profile(d);
        let g = geom.grad_distance(x)?;
        let lap_d = geom.laplacian_distance(x)?;
        let a = coef.eval_a(geom, x, t)?;
        let grad_a = coef.eval_grad_a(geom, x, t)?;
        let grad_z = z1 * g;
        let lap_z = z2 * g * g + z1 * lap_d;
        Ok(XiDerivatives {
            dt_xi: -self.alpha1() * z * z / (2.0 * den * den),
            grad_xi: -z * grad_z / den,
            div_a_grad_xi: -(grad_a * z * grad_z + a * grad_z * grad_z + a * z * lap_z) / den,
            on_interface,
        })
    }
}

/// `ψ_α(z) = (z² + α)^{1/2}`, a smooth convex surrogate for `|z|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularizer {
    pub alpha: f64,
}

impl Regularizer {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::param("alpha", "regularizer needs alpha > 0"));
        }
        Ok(Self { alpha })
    }

    pub fn eval(&self, z: f64) -> f64 {
        (z * z + self.alpha).sqrt()
    }

    pub fn derivative(&self, z: f64) -> f64 {
        z / self.eval(z)
    }

    pub fn second_derivative(&self, z: f64) -> f64 {
        self.alpha / self.eval(z).powi(3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regularizer_rejects_nonpositive_alpha() {
        assert!(Regularizer::new(0.0).is_err());
        assert!(Regularizer::new(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn regularizer_dominates_abs(z in -1e3f64..1e3, a in 1e-8f64..10.0) {
            let p = Regularizer::new(a).unwrap();
            prop_assert!(p.eval(z) >= z.abs());
            prop_assert!(p.eval(z) - z.abs() <= a.sqrt() + 1e-12);
            prop_assert!(p.second_derivative(z) >= 0.0);
        }

        #[test]
        fn regularizer_monotone_in_alpha(z in -10f64..10.0, a in 1e-6f64..1.0, k in 1.0f64..100.0) {
            let p = Regularizer::new(a).unwrap();
            let q = Regularizer::new(a * k).unwrap();
            prop_assert!(p.eval(z) <= q.eval(z));
        }

        #[test]
        fn regularizer_convex_by_second_differences(z in -5f64..5.0, h in 1e-3f64..1.0, a in 1e-4f64..1.0) {
            let p = Regularizer::new(a).unwrap();
            let sd = p.eval(z + h) - 2.0 * p.eval(z) + p.eval(z - h);
            prop_assert!(sd >= -1e-12);
        }
    }
}
