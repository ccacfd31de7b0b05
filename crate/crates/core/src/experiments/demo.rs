use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::solver::{
    build_mesh, residual_in, solve_with, BoundaryTreatment, ProblemSpec, ResidualWindow,
    SolveOptions, Trajectory,
};
use crate::weighted_norms::SliceMass;

use super::probe::{difference, ProbeConfig};

/// Settings of the two Dirichlet solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoConfig {
    pub amplitude: f64,
    pub n_nodes: usize,
    pub grading: f64,
    pub steps: usize,
    /// Crank–Nicolson after `implicit_startup` backward Euler steps.
    pub implicit_startup: usize,
    /// Residuals are measured on `d >= min_distance`, `t >= min_time_fraction·T`.
    pub min_distance: f64,
    pub min_time_fraction: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            n_nodes: 1024,
            grading: 2.0,
            steps: 1024,
            implicit_startup: 4,
            min_distance: 0.05,
            min_time_fraction: 0.1,
        }
    }
}

impl From<&ProbeConfig> for DemoConfig {
    fn from(p: &ProbeConfig) -> Self {
        Self {
            amplitude: p.amplitude.unwrap_or(1.0),
            n_nodes: p.n_nodes,
            grading: p.grading,
            steps: p.steps,
            ..Self::default()
        }
    }
}

/// Two bounded solutions with the same `u0` and `f` that differ only through
/// the data imposed on `∂Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonuniquenessReport {
    pub gamma: f64,
    pub horizon: f64,
    pub amplitude: f64,
    pub residual_a: f64,
    pub residual_b: f64,
    /// `‖u_a(T) - u_b(T)‖_{L¹(Ω)}`.
    pub separation: f64,
    pub sup_a: f64,
    pub sup_b: f64,
    #[serde(skip)]
    pub u_a: Option<Trajectory>,
    #[serde(skip)]
    pub u_b: Option<Trajectory>,
}

pub fn nonuniqueness_demo(
    gamma: f64,
    geom: &DomainGeometry,
    horizon: f64,
    cfg: &DemoConfig,
) -> Result<NonuniquenessReport> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Precondition(format!(
            "two bounded solutions from boundary data need 0 <= gamma < 1 \
             in divergence form (the requirement on gamma is optimal), got {gamma}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("T", "must be positive"));
    }
    let coef = crate::coefficients::DegenerateCoefficient::new(gamma, cfg.amplitude)?;
    let mesh = build_mesh(geom, cfg.n_nodes, cfg.grading)?;
    let mut opts = SolveOptions::new(horizon / cfg.steps as f64, 0.5);
    opts.implicit_startup = cfg.implicit_startup;
    let window = ResidualWindow {
        min_distance: cfg.min_distance,
        min_time: cfg.min_time_fraction * horizon,
    };
    let run = |g: f64| -> Result<(Trajectory, f64)> {
        let spec = ProblemSpec::homogeneous(
            coef,
            horizon,
            BoundaryTreatment::Dirichlet { g_lo: g, g_hi: g },
        );
        let traj = solve_with(&spec, &mesh, &opts)?;
        let res = residual_in(&spec, &mesh, &traj, window)?;
        Ok((traj, res))
    };
    let (a, b) = rayon::join(|| run(0.0), || run(1.0));
    let ((u_a, residual_a), (u_b, residual_b)) = (a?, b?);
    let w = difference(&u_a, &u_b)?;
    let last = Trajectory {
        nodes: w.nodes.clone(),
        times: vec![horizon],
        levels: vec![w.final_level().clone()],
    };
    let separation = SliceMass::new(&last, geom).at_level(0, 0.0);
    Ok(NonuniquenessReport {
        gamma,
        horizon,
        amplitude: cfg.amplitude,
        residual_a,
        residual_b,
        separation,
        sup_a: u_a.max_abs(),
        sup_b: u_b.max_abs(),
        u_a: Some(u_a),
        u_b: Some(u_b),
    })
}
