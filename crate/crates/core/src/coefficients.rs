//! Degenerate coefficient families `a(x,t) = m(t)·C0·d(x)^γ` and their
//! envelope constants.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

/// Bounded time profile `m(t)`, bounded away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    /// `m ≡ 1`
    Constant,
    /// Oscillates between `m_lo` and `m_hi` with the given period.
    Cosine { m_lo: f64, m_hi: f64, period: f64 },
}

impl Modulation {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Modulation::Constant => 1.0,
            Modulation::Cosine { m_lo, m_hi, period } => {
                0.5 * (m_lo + m_hi) + 0.5 * (m_hi - m_lo) * (2.0 * PI * t / period).cos()
            }
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Modulation::Constant => (1.0, 1.0),
            Modulation::Cosine { m_lo, m_hi, .. } => (m_lo, m_hi),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Modulation::Cosine { m_lo, m_hi, period } = *self {
            if !(m_lo > 0.0 && m_hi >= m_lo && m_hi.is_finite()) {
                return Err(Error::param("modulation", "need 0 < m_lo <= m_hi"));
            }
            if !(period > 0.0 && period.is_finite()) {
                return Err(Error::param("modulation", "period must be positive"));
            }
        }
        Ok(())
    }
}

/// Whether the solver uses `div(a∇u)` or `aΔu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorForm {
    Divergence,
    Nondivergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateCoefficient {
    pub gamma: f64,
    /// Amplitude `C0`.
    pub amplitude: f64,
    pub modulation: Modulation,
    pub form: OperatorForm,
    /// `s` in the upper envelope `a <= c3·d^{γ-s}`; zero unless set.
    pub upper_exponent_s: f64,
}

/// Constants of the two-sided envelope `c̃0 d^γ <= a <= c0 d^γ`,
/// `|∇a| <= c1 d^{γ-1}`, plus whether every sample satisfied them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCertificate {
    pub c_tilde0: f64,
    pub c0: f64,
    pub c1: f64,
    pub pass: bool,
    pub samples: usize,
}

/// Constants of the nonuniqueness envelope `c2 d^γ <= a <= c3 d^{γ-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperEnvelopeCertificate {
    pub c2: f64,
    pub c3: f64,
    pub s: f64,
    pub pass: bool,
}

const REL_SLACK: f64 = 1e-12;

impl DegenerateCoefficient {
    pub fn new(gamma: f64, amplitude: f64) -> Result<Self> {
        Self::with_modulation(
            gamma,
            amplitude,
            Modulation::Constant,
            OperatorForm::Divergence,
        )
    }

    pub fn with_modulation(
        gamma: f64,
        amplitude: f64,
        modulation: Modulation,
        form: OperatorForm,
    ) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", "must be finite and >= 0"));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::param("C0", "must be positive"));
        }
        modulation.validate()?;
        Ok(Self {
            gamma,
            amplitude,
            modulation,
            form,
            upper_exponent_s: 0.0,
        })
    }

    pub fn with_form(mut self, form: OperatorForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_upper_exponent(mut self, s: f64) -> Result<Self> {
        if !(s >= 0.0 && (s < self.gamma || s == 0.0)) {
            return Err(Error::param("upper_exponent_s", "must lie in [0, gamma)"));
        }
        self.upper_exponent_s = s;
        Ok(self)
    }

    /// Spatial profile `C0·d^γ` (no time factor).
    pub fn spatial(&self, d: f64) -> f64 {
        self.amplitude * d.powf(self.gamma)
    }

    /// `∂a/∂d` without the time factor.
    pub fn spatial_derivative(&self, d: f64) -> f64 {
        if self.gamma == 0.0 {
            0.0
        } else {
            self.amplitude * self.gamma * d.powf(self.gamma - 1.0)
        }
    }

    pub fn eval_a(&self, geom: &DomainGeometry, x: f64, t: f64) -> Result<f64> {
        let d = geom.distance(x)?;
        Ok(self.modulation.eval(t) * self.spatial(d))
    }

    /// Component of `∇a` along the coordinate axis.
    pub fn eval_grad_a(&self, geom: &DomainGeometry, x: f64, t: f64) -> Result<f64> {
        let d = geom.distance(x)?;
        if self.gamma == 0.0 {
            return Ok(0.0);
        }
        let grad_d = geom.grad_distance(x)?;
        let g = self.modulation.eval(t) * self.spatial_derivative(d) * grad_d;
        if !g.is_finite() {
            return Err(Error::Singularity {
                x,
                what: "coefficient gradient at the boundary for gamma < 1",
            });
        }
        Ok(g)
    }

    /// Analytic envelope constants `(c̃0, c0, c1)`.
    pub fn envelope_constants(&self) -> (f64, f64, f64) {
        let (m_lo, m_hi) = self.modulation.bounds();
        (
            m_lo * self.amplitude,
            m_hi * self.amplitude,
            m_hi * self.amplitude * self.gamma,
        )
    }

    /// Checks the two-sided envelope and the gradient bound at every sample
    /// `(x, t)`. Ridge points are skipped for the gradient bound.
    pub fn certify_a3(
        &self,
        geom: &DomainGeometry,
        samples: &[(f64, f64)],
    ) -> Result<EnvelopeCertificate> {
        let (c_tilde0, c0, c1) = self.envelope_constants();
        let mut pass = true;
        for &(x, t) in samples {
            let d = geom.distance(x)?;
            let a = self.eval_a(geom, x, t)?;
            let dg = d.powf(self.gamma);
            if a < 0.0 || a < c_tilde0 * dg * (1.0 - REL_SLACK) || a > c0 * dg * (1.0 + REL_SLACK) {
                pass = false;
            }
            if geom.is_ridge(x) || (d == 0.0 && self.gamma < 1.0) {
                continue;
            }
            let grad = self.eval_grad_a(geom, x, t)?.abs();
            let bound = if self.gamma == 0.0 {
                0.0
            } else {
                c1 * d.powf(self.gamma - 1.0)
            };
            if grad > bound * (1.0 + REL_SLACK) {
                pass = false;
            }
        }
        Ok(EnvelopeCertificate {
            c_tilde0,
            c0,
            c1,
            pass,
            samples: samples.len(),
        })
    }

    /// Checks `c2 d^γ <= a <= c3 d^{γ-s}` with `c2 = m_lo C0` and
    /// `c3 = m_hi C0 · sup d^s`.
    pub fn certify_upper_envelope(
        &self,
        geom: &DomainGeometry,
        samples: &[(f64, f64)],
    ) -> Result<UpperEnvelopeCertificate> {
        let (m_lo, m_hi) = self.modulation.bounds();
        let s = self.upper_exponent_s;
        let c2 = m_lo * self.amplitude;
        let c3 = m_hi * self.amplitude * geom.max_distance().powf(s);
        let mut pass = true;
        for &(x, t) in samples {
            let d = geom.distance(x)?;
            let a = self.eval_a(geom, x, t)?;
            if a < c2 * d.powf(self.gamma) * (1.0 - REL_SLACK)
                || a > c3 * d.powf(self.gamma - s) * (1.0 + REL_SLACK)
            {
                pass = false;
            }
        }
        Ok(UpperEnvelopeCertificate { c2, c3, s, pass })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> DomainGeometry {
        DomainGeometry::interval(0.0, 1.0).unwrap()
    }

    fn samples(geom: &DomainGeometry) -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        for i in 1..200 {
            let x = i as f64 / 200.0;
            if geom.is_ridge(x) {
                continue;
            }
            for k in 0..7 {
                v.push((x, k as f64 * 0.37));
            }
        }
        v
    }

    #[test]
    fn eval_examples() {
        let g = unit();
        let c = DegenerateCoefficient::new(2.0, 1.0).unwrap();
        assert_relative_eq!(c.eval_a(&g, 0.25, 3.0).unwrap(), 0.0625);

        let c4 = DegenerateCoefficient::new(4.0, 1.0).unwrap();
        let disk = DomainGeometry::disk_radial(1.0, 2).unwrap();
        assert_relative_eq!(c4.eval_a(&disk, 0.5, 0.0).unwrap(), 0.0625);
        assert_relative_eq!(c4.eval_grad_a(&disk, 0.5, 0.0).unwrap(), -0.5);
        assert_relative_eq!(
            c4.eval_grad_a(&g, 0.25, 0.0).unwrap(),
            4.0 * 0.25f64.powi(3)
        );

        let c0 = DegenerateCoefficient::new(0.0, 3.0).unwrap();
        assert_eq!(c0.eval_a(&g, 0.0, 1.0).unwrap(), 3.0);
        assert_eq!(c0.eval_grad_a(&g, 0.3, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gradient_singular_at_boundary_below_one() {
        let c = DegenerateCoefficient::new(0.5, 1.0).unwrap();
        assert!(matches!(
            c.eval_grad_a(&unit(), 0.0, 0.0),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn a3_constants_constant_modulation() {
        let g = unit();
        let c = DegenerateCoefficient::new(2.0, 1.0).unwrap();
        let cert = c.certify_a3(&g, &samples(&g)).unwrap();
        assert_eq!((cert.c_tilde0, cert.c0, cert.c1), (1.0, 1.0, 2.0));
        assert!(cert.pass);
    }

    #[test]
    fn a3_constants_cosine_modulation() {
        let g = unit();
        let m = Modulation::Cosine {
            m_lo: 0.5,
            m_hi: 1.0,
            period: 0.3,
        };
        let c =
            DegenerateCoefficient::with_modulation(1.5, 2.0, m, OperatorForm::Divergence).unwrap();
        let cert = c.certify_a3(&g, &samples(&g)).unwrap();
        assert_eq!((cert.c_tilde0, cert.c0, cert.c1), (1.0, 2.0, 3.0));
        assert!(cert.pass);
    }

    #[test]
    fn a3_single_sample_is_vacuous() {
        let g = unit();
        let c = DegenerateCoefficient::new(2.0, 1.0).unwrap();
        let cert = c.certify_a3(&g, &[(0.3, 0.0)]).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.c1, 2.0);
    }

    #[test]
    fn upper_envelope_holds_for_power_law() {
        let g = unit();
        let c = DegenerateCoefficient::new(0.5, 1.0)
            .unwrap()
            .with_upper_exponent(0.25)
            .unwrap();
        let cert = c.certify_upper_envelope(&g, &samples(&g)).unwrap();
        assert!(cert.pass);
        assert_relative_eq!(cert.c3, 0.5f64.powf(0.25));
        assert!(c.with_upper_exponent(0.6).is_err());
    }
}
