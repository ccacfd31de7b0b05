use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::solver::{build_mesh, solve, BoundaryTreatment, ProblemSpec, Trajectory};

use super::probe::ProbeConfig;

/// Number of `λ` values scanned in `[0, τ_w / (2 T_run)]`.
pub const LAMBDA_GRID: usize = 64;
/// Allowed relative change of the fit under one refinement.
pub const FIT_TOLERANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub n_nodes: usize,
    pub steps: usize,
    pub c_hat: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub gamma: f64,
    pub beta: f64,
    pub tau_w: f64,
    pub t_run: f64,
    pub lambda_max: f64,
    pub coarse: EnvelopeFit,
    pub fine: EnvelopeFit,
    pub change_c_hat: f64,
    pub change_lambda: f64,
    pub stable: bool,
}

/// `Ĉ(λ) = max u exp(-d^β / (τ_w - λ t))` over the stored trajectory.
fn envelope_constant(traj: &Trajectory, dists: &[f64], beta: f64, tau_w: f64, lambda: f64) -> f64 {
    let mut c: f64 = 0.0;
    for (t, lvl) in traj.times.iter().zip(&traj.levels) {
        let den = tau_w - lambda * t;
        for (u, d) in lvl.iter().zip(dists) {
            c = c.max(u.abs() * (-d.powf(beta) / den).exp());
        }
    }
    c
}

/// Smallest `Ĉ` over the admissible `λ` range, and the smallest `λ` within
/// 0.1% of it.
fn fit(traj: &Trajectory, dists: &[f64], beta: f64, tau_w: f64, lambda_max: f64) -> (f64, f64) {
    let curve: Vec<(f64, f64)> = (0..=LAMBDA_GRID)
        .map(|j| {
            let l = lambda_max * j as f64 / LAMBDA_GRID as f64;
            (l, envelope_constant(traj, dists, beta, tau_w, l))
        })
        .collect();
    let best = curve.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let lambda = curve
        .iter()
        .find(|c| c.1 <= best * (1.0 + 1e-3))
        .map(|c| c.0)
        .unwrap_or(lambda_max);
    (best, lambda)
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Evolves `u0 = exp(d^β / τ_w)` with no boundary condition and fits the
/// envelope `Ĉ exp(d^β / (τ_w - λ t))` on `[0, T_run]`.
pub fn existence_bound_check(
    gamma: f64,
    beta: f64,
    tau_w: f64,
    t_run: f64,
    geom: &DomainGeometry,
    cfg: &ProbeConfig,
) -> Result<ExistenceReport> {
    if !(gamma > 2.0) {
        return Err(Error::param("gamma", "existence bound needs gamma > 2"));
    }
    if !(beta > 0.0 && beta <= gamma - 2.0) {
        return Err(Error::Precondition(format!(
            "beta must lie in (0, gamma - 2] = (0, {}], got {beta}",
            gamma - 2.0
        )));
    }
    if !(tau_w > 0.0 && t_run > 0.0 && t_run.is_finite()) {
        return Err(Error::param("tau_w", "tau_w and T_run must be positive"));
    }
    let coef = cfg.coefficient(gamma)?;
    let lambda_max = tau_w / (2.0 * t_run);
    let run = |c: ProbeConfig| -> Result<EnvelopeFit> {
        let mesh = build_mesh(geom, c.n_nodes, c.grading)?;
        let spec = ProblemSpec::homogeneous(coef, t_run, BoundaryTreatment::DegenerateFluxNone)
            .with_initial({
                let g = geom.clone();
                move |x| (g.distance(x).unwrap_or(0.0).powf(beta) / tau_w).exp()
            });
        let traj = solve(&spec, &mesh, t_run / c.steps as f64, c.theta_scheme)?;
        let dists: Vec<f64> = traj
            .nodes
            .iter()
            .map(|&x| geom.distance(x))
            .collect::<Result<_>>()?;
        let (c_hat, lambda) = fit(&traj, &dists, beta, tau_w, lambda_max);
        Ok(EnvelopeFit {
            n_nodes: c.n_nodes,
            steps: c.steps,
            c_hat,
            lambda,
        })
    };
    let fits = [*cfg, cfg.refined()]
        .par_iter()
        .map(|&c| run(c))
        .collect::<Result<Vec<_>>>()?;
    let (coarse, fine) = (fits[0], fits[1]);
    let change_c_hat = rel(coarse.c_hat, fine.c_hat);
    let change_lambda = rel(coarse.lambda, fine.lambda);
    Ok(ExistenceReport {
        gamma,
        beta,
        tau_w,
        t_run,
        lambda_max,
        coarse,
        fine,
        change_c_hat,
        change_lambda,
        stable: change_c_hat < FIT_TOLERANCE && change_lambda < FIT_TOLERANCE,
    })
}
