use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::ClassCertificate;
use crate::coefficients::DegenerateCoefficient;
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

use super::cutoff::CutoffFunction;
use super::params::{SubcriticalBarrier, SupercriticalBarrier};
use super::Barrier;

/// Slack allowed above zero for the sampled barrier inequalities.
pub const CLAIM_TOLERANCE: f64 = 1e-10;

const CHUNK: usize = 512;

/// Space and time samples for a certification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub points: Vec<f64>,
    pub times: Vec<f64>,
}

/// Distances in `(lo, hi)` clustered toward `lo` with a square law.
fn graded(lo: f64, hi: f64, m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |j| lo + (hi - lo) * ((j as f64 + 0.5) / m as f64).powi(2))
}

fn points_from_distances(geom: &DomainGeometry, dists: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = dists
        .flat_map(|d| geom.points_at_distance(d))
        .filter(|&x| !geom.is_ridge(x))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

impl SampleGrid {
    pub fn new(points: Vec<f64>, times: Vec<f64>) -> Self {
        Self { points, times }
    }

    pub fn len(&self) -> usize {
        self.points.len() * self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// About `n_space` points in the layer `0 < d < ε` (where `ξ` is not
    /// identically zero), graded toward `∂Ω`, and `n_time` times strictly
    /// inside `(τ-δ, τ)`.
    pub fn for_barrier<B: Barrier>(
        geom: &DomainGeometry,
        barrier: &B,
        n_space: usize,
        n_time: usize,
    ) -> Self {
        let sides = geom
            .points_at_distance(0.5 * geom.max_distance())
            .len()
            .max(1);
        let m = (n_space / sides).max(1);
        let eps = barrier.eps();
        let top = eps.min(geom.max_distance());
        let dists = graded(0.0, top, m).filter(move |&d| d > 0.0 && d < eps);
        let points = points_from_distances(geom, dists);
        let (tau, delta) = (barrier.tau(), barrier.delta());
        let times = (1..=n_time)
            .map(|k| tau - delta + delta * k as f64 / (n_time + 1) as f64)
            .collect();
        Self { points, times }
    }

    /// Uniform samples of the cutoff shell `ε/2 < d < 2ε/3`.
    pub fn shell(geom: &DomainGeometry, eps: f64, n_space: usize, times: Vec<f64>) -> Self {
        let sides = geom
            .points_at_distance(0.5 * geom.max_distance())
            .len()
            .max(1);
        let m = (n_space / sides).max(1);
        let (lo, hi) = (0.5 * eps, 2.0 * eps / 3.0);
        let dists = (0..m).map(move |j| lo + (hi - lo) * (j as f64 + 0.5) / m as f64);
        Self {
            points: points_from_distances(geom, dists),
            times,
        }
    }
}

fn certify_claim<B: Barrier + Sync>(
    claim: &str,
    barrier: &B,
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    grid: &SampleGrid,
) -> Result<ClassCertificate> {
    let cert = grid
        .points
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<ClassCertificate> {
            let mut c = ClassCertificate::new(claim);
            for &x in chunk {
                for &t in &grid.times {
                    let der = barrier.eval_xi_derivatives(coef, geom, x, t)?;
                    if der.on_interface {
                        continue;
                    }
                    let a = coef.eval_a(geom, x, t)?;
                    let v = der.claim_value(a);
                    if !v.is_finite() {
                        return Err(Error::NonFinite { x, t, value: v });
                    }
                    c.observe(v, (x, t));
                }
            }
            Ok(c)
        })
        .try_reduce(|| ClassCertificate::new(claim), |a, b| Ok(a.merge(b)))?;
    Ok(cert
        .with_param("eps", barrier.eps())
        .with_param("tau", barrier.tau())
        .with_param("delta", barrier.delta())
        .with_param("alpha1", barrier.alpha1())
        .with_param("s", barrier.s())
        .with_param("gamma", coef.gamma)
        .finish(CLAIM_TOLERANCE))
}

/// Samples `∂tξ + (5/2)a|∇ξ|² + div(a∇ξ)` for the `γ > 2` barrier; passes iff
/// the largest value is `<= 1e-10`.
pub fn verify_e1(
    barrier: &SupercriticalBarrier,
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    grid: &SampleGrid,
) -> Result<ClassCertificate> {
    Ok(certify_claim("E1", barrier, coef, geom, grid)?
        .with_param("c", barrier.c)
        .with_param("sigma", barrier.sigma)
        .with_param("theta", barrier.theta))
}

/// Same inequality for the `γ ∈ [1, 2]` barrier.
pub fn verify_d1(
    barrier: &SubcriticalBarrier,
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    grid: &SampleGrid,
) -> Result<ClassCertificate> {
    Ok(certify_claim("D1", barrier, coef, geom, grid)?
        .with_param("ell", barrier.ell)
        .with_param("sigma_bar", barrier.sigma_bar)
        .with_param("beta", barrier.beta))
}

/// `η div(a∇η) + (5/2)a|∇η|²` at one point.
fn cutoff_integrand(
    cutoff: &CutoffFunction,
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    x: f64,
    t: f64,
) -> Result<f64> {
    let (e, ge, le) = cutoff.eval(geom, x)?;
    let a = coef.eval_a(geom, x, t)?;
    let ga = coef.eval_grad_a(geom, x, t)?;
    Ok(e * (ga * ge + a * le) + 2.5 * a * ge * ge)
}

/// Analytic bound on the shell ratio from `|∇a| <= c1 d^{γ-1}`,
/// `a <= c0 d^γ`, `|∇η| <= A1/ε`, `|Δη| <= A2/ε² + k0 A1/ε`, with `d = yε`,
/// `y ∈ [1/2, 2/3]`. `pointwise` selects division by `d^{γ-2}` instead of
/// `ε^{γ-2}`.
fn shell_ratio_bound(coef: &DegenerateCoefficient, k0: f64, eps: f64, pointwise: bool) -> f64 {
    let (_, c0, c1) = coef.envelope_constants();
    let (a1, a2) = super::cutoff::cutoff_constants(&CutoffFunction { eps });
    let g = coef.gamma;
    let ymax = |p: f64| (0.5f64).powf(p).max((2.0f64 / 3.0).powf(p));
    let (p1, p2) = if pointwise { (1.0, 2.0) } else { (g - 1.0, g) };
    c1 * a1 * ymax(p1) + c0 * (a2 + 2.5 * a1 * a1) * ymax(p2) + c0 * k0 * a1 * eps * ymax(p2)
}

fn shell_sweep(
    claim: &str,
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    eps_sweep: &[f64],
    n_space: usize,
    times: &[f64],
    pointwise: bool,
) -> Result<ClassCertificate> {
    if eps_sweep.is_empty() {
        return Err(Error::param("eps_sweep", "must not be empty"));
    }
    let g = coef.gamma;
    let rows: Vec<(f64, f64, (f64, f64), usize, f64)> = eps_sweep
        .par_iter()
        .map(|&eps| -> Result<_> {
            let (k0, _) = geom.regularity_constants(eps)?;
            let cutoff = CutoffFunction::new(eps)?;
            let grid = SampleGrid::shell(geom, eps, n_space, times.to_vec());
            let mut worst = f64::NEG_INFINITY;
            let mut at = (f64::NAN, f64::NAN);
            for &x in &grid.points {
                let d = geom.distance(x)?;
                let scale = if pointwise { d } else { eps };
                for &t in &grid.times {
                    let r = cutoff_integrand(&cutoff, coef, geom, x, t)? / scale.powf(g - 2.0);
                    if r > worst {
                        worst = r;
                        at = (x, t);
                    }
                }
            }
            let bound = shell_ratio_bound(coef, k0, eps, pointwise);
            Ok((eps, worst, at, grid.len(), bound))
        })
        .collect::<Result<_>>()?;
    let mut cert = ClassCertificate::new(claim).with_param("gamma", g);
    let mut pass = true;
    let mut c1: f64 = 0.0;
    for (eps, worst, at, n, bound) in rows {
        cert.sweep.push((eps, worst));
        cert.grid_size += n;
        c1 = c1.max(bound);
        if worst > bound {
            pass = false;
        }
        if cert.worst_point.is_none() || worst > cert.worst_value {
            cert.worst_value = worst;
            cert.worst_point = Some(at);
        }
    }
    cert.pass = pass;
    Ok(cert.with_param("C1", c1))
}

/// Sup over the cutoff shell of `η div(a∇η) + (5/2)a|∇η|²`, divided by
/// `ε^{γ-2}`, for each `ε` in the sweep. Passes iff every ratio stays below
/// the analytic constant `C1` recorded in `params`.
pub fn verify_e2(
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    eps_sweep: &[f64],
    n_space: usize,
    times: &[f64],
) -> Result<ClassCertificate> {
    shell_sweep("E2", coef, geom, eps_sweep, n_space, times, false)
}

/// As [`verify_e2`] with the pointwise divisor `d^{γ-2}`.
pub fn verify_d2(
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    eps_sweep: &[f64],
    n_space: usize,
    times: &[f64],
) -> Result<ClassCertificate> {
    shell_sweep("D2", coef, geom, eps_sweep, n_space, times, true)
}

/// `|∇ξ|` on `∂Ω^ε` from the outer side; passes iff every value is
/// `<= 1e-10`.
pub fn normal_derivative_check<B: Barrier>(
    barrier: &B,
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    t_samples: &[f64],
) -> Result<ClassCertificate> {
    let mut cert = ClassCertificate::new("normal_derivative").with_param("eps", barrier.eps());
    for x in geom.points_at_distance(barrier.eps()) {
        for &t in t_samples {
            let der = barrier.eval_xi_derivatives(coef, geom, x, t)?;
            cert.observe(der.grad_xi.abs(), (x, t));
        }
    }
    Ok(cert.finish(CLAIM_TOLERANCE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::{
        select_subcritical_params, select_supercritical_params, BarrierConstants,
    };

    fn unit() -> DomainGeometry {
        DomainGeometry::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn grid_inside_interior_set_gives_zero() {
        let g = unit();
        let coef = DegenerateCoefficient::new(4.0, 1.0).unwrap();
        let k = BarrierConstants::from_problem(&coef, &g, 0.1).unwrap();
        let b = select_supercritical_params(4.0, k, 1.0, 1.0, 0.1).unwrap();
        let grid = SampleGrid::new(vec![0.2, 0.3, 0.7], vec![1.0 - 0.5 * b.delta]);
        let c = verify_e1(&b, &coef, &g, &grid).unwrap();
        assert!(c.pass);
        assert_eq!(c.worst_value, 0.0);
    }

    #[test]
    fn grid_avoids_interface_and_ridge() {
        let g = unit();
        let coef = DegenerateCoefficient::new(1.5, 1.0).unwrap();
        let k = BarrierConstants::from_problem(&coef, &g, 0.1).unwrap();
        let b = select_subcritical_params(1.5, k, 1.0, 0.1, None).unwrap();
        let grid = SampleGrid::for_barrier(&g, &b, 2000, 5);
        assert!(grid.points.iter().all(|&x| x > 0.0 && x < 1.0 && x != 0.5));
        assert!(grid.times.iter().all(|&t| t > 1.0 - b.delta && t < 1.0));
        let nd = normal_derivative_check(&b, &coef, &g, &grid.times).unwrap();
        assert!(nd.pass);
        assert_eq!(nd.grid_size, 10);
    }

    #[test]
    fn e2_ratio_is_scale_free_on_interval() {
        let g = unit();
        let coef = DegenerateCoefficient::new(4.0, 1.0).unwrap();
        let c = verify_e2(&coef, &g, &[0.2, 0.1, 0.05, 0.025], 2000, &[0.0]).unwrap();
        assert!(c.pass);
        let vals: Vec<f64> = c.sweep.iter().map(|s| s.1).collect();
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        assert!(hi <= 1.2 * lo, "{vals:?}");
    }
}
