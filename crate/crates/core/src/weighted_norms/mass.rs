use super::classes::IterationCheck;
use crate::error::{Error, Result};
use crate::geometry::{unit_sphere_area, DomainGeometry, DomainKind};
use crate::solver::Trajectory;

/// Exact masses `∫_{Ω^ε} |w(x, t)| dx` of a stored trajectory, using the
/// piecewise-linear interpolant of `|w|` in space and time (constant beyond
/// the outermost nodes).
#[derive(Debug, Clone)]
pub struct SliceMass {
    geom: DomainGeometry,
    nodes: Vec<f64>,
    times: Vec<f64>,
    levels: Vec<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
}

impl SliceMass {
    pub fn new(traj: &Trajectory, geom: &DomainGeometry) -> Self {
        let levels: Vec<Vec<f64>> = traj
            .levels
            .iter()
            .map(|l| l.iter().map(|v| v.abs()).collect())
            .collect();
        let mut s = Self {
            geom: geom.clone(),
            nodes: traj.nodes.clone(),
            times: traj.times.clone(),
            levels,
            prefix: Vec::new(),
        };
        s.prefix = s.levels.iter().map(|f| s.prefix_of(f)).collect();
        s
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn radial_dim(&self) -> Option<u32> {
        match self.geom.kind {
            DomainKind::DiskRadial { n, .. } => Some(n),
            DomainKind::Interval { .. } => None,
        }
    }

    /// `∫ (A + Bρ) ρ^{n-1} dρ` antiderivative, or plain `∫ (A + Bx) dx`.
    fn anti(&self, a: f64, b: f64, x: f64) -> f64 {
        match self.radial_dim() {
            None => a * x + 0.5 * b * x * x,
            Some(n) => {
                let n = n as f64;
                a * x.powf(n) / n + b * x.powf(n + 1.0) / (n + 1.0)
            }
        }
    }

    fn origin(&self) -> f64 {
        match self.geom.kind {
            DomainKind::Interval { x_lo, .. } => x_lo,
            DomainKind::DiskRadial { .. } => 0.0,
        }
    }

    fn prefix_of(&self, f: &[f64]) -> Vec<f64> {
        let xs = &self.nodes;
        let mut p = Vec::with_capacity(xs.len());
        p.push(self.anti(f[0], 0.0, xs[0]) - self.anti(f[0], 0.0, self.origin()));
        for i in 0..xs.len() - 1 {
            let (a, b) = self.line(f, i);
            let inc = self.anti(a, b, xs[i + 1]) - self.anti(a, b, xs[i]);
            p.push(p[i] + inc);
        }
        p
    }

    fn line(&self, f: &[f64], i: usize) -> (f64, f64) {
        let xs = &self.nodes;
        let b = (f[i + 1] - f[i]) / (xs[i + 1] - xs[i]);
        (f[i] - b * xs[i], b)
    }

    /// `∫_{origin}^{x}` of level `n`.
    fn cumulative(&self, n: usize, x: f64) -> f64 {
        let xs = &self.nodes;
        let f = &self.levels[n];
        let p = &self.prefix[n];
        let last = xs.len() - 1;
        if x <= xs[0] {
            return self.anti(f[0], 0.0, x) - self.anti(f[0], 0.0, self.origin());
        }
        if x >= xs[last] {
            return p[last] + self.anti(f[last], 0.0, x) - self.anti(f[last], 0.0, xs[last]);
        }
        let i = xs.partition_point(|&v| v <= x) - 1;
        let (a, b) = self.line(f, i);
        p[i] + self.anti(a, b, x) - self.anti(a, b, xs[i])
    }

    /// `∫_{Ω^ε} |w(t_n)|`.
    pub fn at_level(&self, n: usize, eps: f64) -> f64 {
        match self.geom.kind {
            DomainKind::Interval { x_lo, x_hi } => {
                let (a, b) = (x_lo + eps, x_hi - eps);
                if a >= b {
                    return 0.0;
                }
                self.cumulative(n, b) - self.cumulative(n, a)
            }
            DomainKind::DiskRadial { radius, n: dim } => {
                let r = radius - eps;
                if r <= 0.0 {
                    return 0.0;
                }
                unit_sphere_area(dim) * self.cumulative(n, r)
            }
        }
    }

    /// `∫_{Ω^ε} |w(t)|`, linear in `t` between stored levels.
    pub fn mass(&self, eps: f64, t: f64) -> f64 {
        let ts = &self.times;
        let last = ts.len() - 1;
        if t <= ts[0] {
            return self.at_level(0, eps);
        }
        if t >= ts[last] {
            return self.at_level(last, eps);
        }
        let hi = ts.partition_point(|&v| v <= t).min(last);
        let lo = hi - 1;
        let w = (t - ts[lo]) / (ts[hi] - ts[lo]);
        (1.0 - w) * self.at_level(lo, eps) + w * self.at_level(hi, eps)
    }

    /// The iteration inequality evaluated with exact slice masses.
    pub fn check(
        &self,
        eps: f64,
        delta: f64,
        tau: f64,
        mu: f64,
        c_hat: f64,
    ) -> Result<IterationCheck> {
        if tau - delta < 0.0 {
            return Err(Error::param("delta", "tau - delta must be nonnegative"));
        }
        let lhs = self.mass(eps, tau);
        let rhs = self.mass(0.5 * eps, tau - delta) + c_hat * eps.powf(mu);
        Ok(IterationCheck::new(lhs, rhs))
    }
}
