//! Telescoping schedules `(ε_k, δ_k, τ_k)`.
//!
//! Times are held as integer multiples of a power-of-two quantum `q ≤ ulp(τ)`,
//! so `τ - τ_{k+1} = δ_1 + … + δ_k` holds exactly in `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest rung count enumerated exactly; beyond it `k0` is obtained by
/// inverting the harmonic sum.
pub const ENUMERATION_LIMIT: u64 = 1 << 27;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `ε_k = ε k^{-1/μ1}`, `δ_k = min(τ_k, c ε_k^{μ1})`.
    Power { mu1: f64 },
    /// `ε_k = ε 2^{1-k}`, `δ_k = min(τ_k, c)`.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub k: u64,
    pub eps_k: f64,
    pub delta_k: f64,
    pub tau_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopingSchedule {
    pub kind: ScheduleKind,
    pub eps: f64,
    /// Exponent of the per-rung error `ε_k^{μ2}`.
    pub mu2: f64,
    pub tau: f64,
    pub c_cap: f64,
    pub quantum: f64,
    /// Number of rungs until `τ_{k0+1} = 0`; infinite when it exceeds the
    /// `f64` range, in which case only `ln_k0` is meaningful.
    pub k0: f64,
    pub ln_k0: f64,
    /// Whether `k0` was obtained by enumerating the quantized schedule.
    pub exact: bool,
    /// `Σ_{k ≤ k0} ε_k^{μ2}`.
    pub tail_bound: f64,
    /// `S` with `Σ_k ε_k^{μ2} ≤ S ε^{μ2}`.
    pub zeta_factor: f64,
}

fn quantum_for(tau: f64) -> f64 {
    // power of two with tau / q < 2^53
    2f64.powi(tau.log2().floor() as i32 - 52)
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, "must be positive and finite"))
    }
}

/// `Σ_{k=1}^{n} k^{-p}` (direct below 10⁴ terms, Euler–Maclaurin above).
pub fn partial_zeta(p: f64, n: f64) -> f64 {
    const DIRECT: f64 = 1e4;
    const N: u64 = 1000;
    let n = n.floor();
    if n < 1.0 {
        return 0.0;
    }
    if n <= DIRECT {
        return (1..=n as u64).rev().map(|k| (k as f64).powf(-p)).sum();
    }
    let head: f64 = (1..=N).rev().map(|k| (k as f64).powf(-p)).sum();
    head + em_tail(p, N as f64, n)
}

/// `ζ(p)` for `p > 1`.
pub fn zeta(p: f64) -> f64 {
    assert!(p > 1.0, "zeta needs p > 1");
    partial_zeta(p, 1e4) + em_tail(p, 1e4, f64::INFINITY)
}

/// `Σ_{k=N+1}^{n} k^{-p}`.
fn em_tail(p: f64, big_n: f64, n: f64) -> f64 {
    let f = |x: f64| if x.is_infinite() { 0.0 } else { x.powf(-p) };
    let f1 = |x: f64| {
        if x.is_infinite() {
            0.0
        } else {
            -p * x.powf(-p - 1.0)
        }
    };
    let f3 = |x: f64| {
        if x.is_infinite() {
            0.0
        } else {
            -p * (p + 1.0) * (p + 2.0) * x.powf(-p - 3.0)
        }
    };
    let integral = if (p - 1.0).abs() < 1e-15 {
        (n / big_n).ln()
    } else {
        let up = if n.is_infinite() {
            0.0
        } else {
            n.powf(1.0 - p)
        };
        (big_n.powf(1.0 - p) - up) / (p - 1.0)
    };
    integral + 0.5 * (f(n) - f(big_n)) + (f1(n) - f1(big_n)) / 12.0 - (f3(n) - f3(big_n)) / 720.0
}

/// Smallest `k` with `H_k ≥ r`.
fn harmonic_inverse(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r < 15.0 {
        let mut h = 0.0;
        let mut k = 0u64;
        while h < r {
            k += 1;
            h += 1.0 / k as f64;
        }
        return k as f64;
    }
    let h = |k: f64| k.ln() + EULER_GAMMA + 0.5 / k - 1.0 / (12.0 * k * k);
    let mut k = (r - EULER_GAMMA).exp();
    if k.is_infinite() {
        return k;
    }
    for _ in 0..8 {
        k -= (h(k) - r) * k;
    }
    k.ceil()
}

/// Power schedule of the subcritical iteration.
pub fn telescoping_schedule(
    eps: f64,
    mu1: f64,
    mu2: f64,
    tau: f64,
    c_cap: f64,
) -> Result<TelescopingSchedule> {
    for (n, v) in [("eps", eps), ("mu1", mu1), ("tau", tau), ("c_cap", c_cap)] {
        check_positive(n, v)?;
    }
    if !(mu2 > mu1) {
        return Err(Error::Precondition(format!(
            "telescoping needs mu2 > mu1, got mu1 = {mu1}, mu2 = {mu2}"
        )));
    }
    let q = quantum_for(tau);
    // ε_k^{μ1} = ε^{μ1}/k, so the uncapped steps follow the harmonic series.
    let step = c_cap * eps.powf(mu1);
    check_positive("c_cap * eps^mu1", step)?;
    let r = tau / step;
    let estimate = if r <= 1.0 {
        1.0
    } else {
        (r - EULER_GAMMA).exp()
    };
    let (k0, exact) = if estimate <= ENUMERATION_LIMIT as f64 {
        let units = step / q;
        let mut left = (tau / q) as u64;
        let mut k = 0u64;
        while left > 0 {
            k += 1;
            let d = ((units / k as f64).floor() as u64).min(left);
            if d == 0 {
                return Err(Error::ScheduleCap { cap: k });
            }
            left -= d;
        }
        (k as f64, true)
    } else {
        (harmonic_inverse(r), false)
    };
    // past e^700 the correction terms of ln k0 = r - γ_E are below ulp
    let ln_k0 = if k0.is_finite() {
        k0.ln()
    } else {
        r - EULER_GAMMA
    };
    let p = mu2 / mu1;
    let scale = eps.powf(mu2);
    Ok(TelescopingSchedule {
        kind: ScheduleKind::Power { mu1 },
        eps,
        mu2,
        tau,
        c_cap,
        quantum: q,
        k0,
        ln_k0,
        exact,
        tail_bound: scale * partial_zeta(p, k0),
        zeta_factor: zeta(p),
    })
}

/// Geometric schedule of the supercritical iteration: `ε` halves at every rung
/// and `δ` is the constant cap.
pub fn geometric_schedule(
    eps: f64,
    mu: f64,
    tau: f64,
    delta_cap: f64,
) -> Result<TelescopingSchedule> {
    for (n, v) in [
        ("eps", eps),
        ("mu", mu),
        ("tau", tau),
        ("delta_cap", delta_cap),
    ] {
        check_positive(n, v)?;
    }
    let q = quantum_for(tau);
    let d = (delta_cap / q).floor() as u64;
    if d == 0 {
        return Err(Error::ScheduleCap { cap: 1 });
    }
    let m = (tau / q) as u64;
    let k0 = m.div_ceil(d);
    let ratio = 2f64.powf(-mu);
    let scale = eps.powf(mu);
    Ok(TelescopingSchedule {
        kind: ScheduleKind::Geometric,
        eps,
        mu2: mu,
        tau,
        c_cap: delta_cap,
        quantum: q,
        k0: k0 as f64,
        ln_k0: (k0 as f64).ln(),
        exact: true,
        tail_bound: scale * (1.0 - ratio.powf(k0 as f64)) / (1.0 - ratio),
        zeta_factor: 1.0 / (1.0 - ratio),
    })
}

impl TelescopingSchedule {
    /// `S ε^{μ2}`.
    pub fn majorant(&self) -> f64 {
        self.zeta_factor * self.eps.powf(self.mu2)
    }

    /// Rungs in order; ends when `τ_{k+1} = 0` or the quantized step vanishes.
    pub fn rungs(&self) -> Rungs<'_> {
        Rungs {
            schedule: self,
            k: 0,
            left: (self.tau / self.quantum) as u64,
        }
    }

    pub fn materialize(&self, limit: usize) -> Vec<Rung> {
        self.rungs().take(limit).collect()
    }
}

pub struct Rungs<'a> {
    schedule: &'a TelescopingSchedule,
    k: u64,
    left: u64,
}

impl Iterator for Rungs<'_> {
    type Item = Rung;

    fn next(&mut self) -> Option<Rung> {
        if self.left == 0 {
            return None;
        }
        let s = self.schedule;
        let k = self.k + 1;
        let (eps_k, units) = match s.kind {
            ScheduleKind::Power { mu1 } => (
                s.eps * (k as f64).powf(-1.0 / mu1),
                s.c_cap * s.eps.powf(mu1) / s.quantum / k as f64,
            ),
            ScheduleKind::Geometric => (s.eps * 2f64.powf(1.0 - k as f64), s.c_cap / s.quantum),
        };
        let d = (units.floor() as u64).min(self.left);
        if d == 0 {
            return None;
        }
        let rung = Rung {
            k,
            eps_k,
            delta_k: d as f64 * s.quantum,
            tau_k: self.left as f64 * s.quantum,
        };
        self.k = k;
        self.left -= d;
        Some(rung)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zeta_values() {
        use std::f64::consts::PI;
        assert_relative_eq!(zeta(2.0), PI * PI / 6.0, max_relative = 1e-13);
        assert_relative_eq!(zeta(4.0), PI.powi(4) / 90.0, max_relative = 1e-13);
        assert_relative_eq!(zeta(1.2), 5.591_582_441_177_75, max_relative = 1e-10);
    }

    #[test]
    fn partial_zeta_matches_brute_force() {
        for &(p, n) in &[(1.2, 50_000u64), (2.0, 12_345), (1.5, 10_001)] {
            let brute: f64 = (1..=n).rev().map(|k| (k as f64).powf(-p)).sum();
            assert_relative_eq!(partial_zeta(p, n as f64), brute, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_rung() {
        let s = telescoping_schedule(0.1, 1.0, 2.0, 0.05, 1.0).unwrap();
        assert_eq!(s.k0, 1.0);
        let r = s.materialize(10);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].delta_k, 0.05);
        assert_relative_eq!(s.tail_bound, 0.01, max_relative = 1e-15);
        assert!(s.tail_bound <= s.majorant());
        assert_relative_eq!(
            s.majorant(),
            std::f64::consts::PI.powi(2) / 600.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn harmonic_oracle() {
        // H_k ≥ 5 first at k = 83
        let s = telescoping_schedule(0.1, 1.0, 2.0, 0.5, 1.0).unwrap();
        let mut h = 0.0;
        let mut k = 0;
        while 0.1 * h < 0.5 {
            k += 1;
            h += 1.0 / k as f64;
        }
        assert_eq!(s.k0, k as f64);
        assert!(s.exact);
        assert_eq!(s.rungs().count(), k);
    }

    #[test]
    fn long_horizon_inverts_harmonic_sum() {
        let s = telescoping_schedule(0.1, 1.0, 2.0, 10.0, 1.0).unwrap();
        assert!(!s.exact);
        let k = s.k0;
        let h = |k: f64| k.ln() + EULER_GAMMA + 0.5 / k;
        assert!(h(k) >= 100.0 - 1e-12);
        assert!(h(k * (1.0 - 1e-12)) < 100.0 + 1e-12);
        assert!(s.tail_bound <= s.majorant());
    }

    #[test]
    fn overflowing_rung_count_keeps_log() {
        // τ / (c ε^μ1) = 4000, so k0 ≈ e^{4000 - γ_E}
        let s = telescoping_schedule(0.05, 2.0, 2.5, 10.0, 1.0).unwrap();
        assert!(!s.exact);
        assert!(s.k0.is_infinite());
        assert!((s.ln_k0 - (4000.0 - EULER_GAMMA)).abs() < 1e-9);
        let full = 0.05f64.powf(2.5) * zeta(1.25);
        assert!((s.tail_bound - full).abs() <= 1e-12 * full);
    }

    #[test]
    fn rejects_mu_order() {
        assert!(matches!(
            telescoping_schedule(0.1, 2.0, 1.0, 1.0, 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(telescoping_schedule(0.1, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn geometric_rungs() {
        let s = geometric_schedule(0.1, 2.0, 1.0, 0.3).unwrap();
        let r = s.materialize(100);
        assert_eq!(r.len(), 4);
        assert_eq!(s.k0, 4.0);
        assert_eq!(r[3].eps_k, 0.0125);
        let sum: f64 = r.iter().map(|r| r.eps_k.powi(2)).sum();
        assert_relative_eq!(s.tail_bound, sum, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn telescoping_identity(
            eps in 0.01f64..0.5,
            mu1 in 0.2f64..2.0,
            dmu in 0.05f64..2.0,
            tau in 1e-3f64..2.0,
            c in 0.5f64..20.0,
        ) {
            let s = telescoping_schedule(eps, mu1, mu1 + dmu, tau, c).unwrap();
            prop_assert!(s.k0 >= 1.0);
            prop_assert!(s.tail_bound <= s.majorant() * (1.0 + 1e-12));
            if s.exact && s.k0 <= 2e5 {
                let mut sum = 0.0;
                let mut last = None;
                for r in s.rungs() {
                    prop_assert_eq!(tau - r.tau_k, sum);
                    sum += r.delta_k;
                    last = Some(r);
                }
                let last = last.unwrap();
                prop_assert_eq!(last.k as f64, s.k0);
                prop_assert_eq!(last.tau_k - last.delta_k, 0.0);
                prop_assert_eq!(sum, tau);
            }
        }
    }
}
