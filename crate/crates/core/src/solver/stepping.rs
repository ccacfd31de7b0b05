use crate::barriers::Regularizer;
use crate::certificate::ClassCertificate;
use crate::error::{Error, Result};

use super::mesh::Mesh1D;
use super::operator::Discretization;
use super::trajectory::{GridFunction, Trajectory};
use super::ProblemSpec;

/// Default number of time steps over the horizon.
pub const DEFAULT_STEPS: usize = 2048;

const BLOW_UP: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    All,
    /// Keep only the initial and final levels.
    Endpoints,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub dt: f64,
    pub theta: f64,
    /// Number of leading fully implicit steps before switching to `theta`
    /// (damps the stiff modes excited by rough data when `theta = 1/2`).
    pub implicit_startup: usize,
    pub storage: Storage,
}

impl SolveOptions {
    pub fn new(dt: f64, theta: f64) -> Self {
        Self {
            dt,
            theta,
            implicit_startup: 0,
            storage: Storage::All,
        }
    }

    pub fn for_horizon(horizon: f64) -> Self {
        Self::new(horizon / DEFAULT_STEPS as f64, 1.0)
    }
}

fn step_count(horizon: f64, dt: f64) -> usize {
    let r = horizon / dt;
    let n = if (r - r.round()).abs() <= 1e-9 * r {
        r.round()
    } else {
        r.ceil()
    };
    (n as usize).max(1)
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::param("theta_scheme", "must lie in [0, 1]"));
    }
    Ok(())
}

fn check_cfl(disc: &Discretization, spec: &ProblemSpec, dt: f64, theta: f64) -> Result<()> {
    if theta >= 0.5 {
        return Ok(());
    }
    let (_, m_hi) = spec.coefficient.modulation.bounds();
    let stiff = (1.0 - 2.0 * theta) * m_hi * disc.max_diagonal();
    let bound = if stiff > 0.0 {
        1.0 / stiff
    } else {
        f64::INFINITY
    };
    if dt > bound {
        return Err(Error::Cfl { dt, bound });
    }
    Ok(())
}

fn advance(
    disc: &Discretization,
    spec: &ProblemSpec,
    u: &[f64],
    t: f64,
    dt: f64,
    theta: f64,
) -> Result<GridFunction> {
    let m1 = disc.modulation(t + dt);
    let b = disc.data_vector();
    let mut rhs = u.to_vec();
    if theta < 1.0 {
        let lu = disc.apply(u, t);
        for i in 0..rhs.len() {
            rhs[i] += (1.0 - theta) * dt * lu[i];
        }
    }
    if spec.source.is_some() {
        for (i, &x) in disc.nodes.iter().enumerate() {
            rhs[i] +=
                dt * (theta * spec.source_at(x, t + dt) + (1.0 - theta) * spec.source_at(x, t));
        }
    }
    if theta == 0.0 {
        return Ok(rhs);
    }
    for i in 0..rhs.len() {
        rhs[i] += theta * dt * m1 * b[i];
    }
    let a = disc.matrix();
    let mut sys = a.clone();
    let s = theta * dt * m1;
    for i in 0..sys.len() {
        sys.lower[i] *= -s;
        sys.upper[i] *= -s;
        sys.diag[i] = 1.0 - s * a.diag[i];
    }
    sys.solve(&rhs)
}

fn guard(u: &[f64], time: f64) -> Result<()> {
    if u.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
        return Err(Error::BlowUp { time });
    }
    Ok(())
}

/// One θ-step from `t` to `t + dt`. `u_level` lives on the active nodes.
pub fn step_theta(
    spec: &ProblemSpec,
    mesh: &Mesh1D,
    u_level: &[f64],
    t: f64,
    dt: f64,
    theta_scheme: f64,
) -> Result<GridFunction> {
    check_theta(theta_scheme)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", "must be positive"));
    }
    let disc = Discretization::new(spec, mesh)?;
    if u_level.len() != disc.len() {
        return Err(Error::param(
            "u_level",
            "length does not match the active nodes",
        ));
    }
    check_cfl(&disc, spec, dt, theta_scheme)?;
    let u = advance(&disc, spec, u_level, t, dt, theta_scheme)?;
    guard(&u, t + dt)?;
    Ok(u)
}

pub fn solve_with(spec: &ProblemSpec, mesh: &Mesh1D, opts: &SolveOptions) -> Result<Trajectory> {
    check_theta(opts.theta)?;
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::param("dt", "must be positive"));
    }
    let disc = Discretization::new(spec, mesh)?;
    let steps = step_count(spec.horizon, opts.dt);
    let dt = spec.horizon / steps as f64;
    if opts.implicit_startup < steps {
        check_cfl(&disc, spec, dt, opts.theta)?;
    }

    let mut u: GridFunction = disc.nodes.iter().map(|&x| (spec.initial)(x)).collect();
    guard(&u, 0.0)?;
    let mut times = vec![0.0];
    let mut levels = vec![u.clone()];
    for k in 0..steps {
        let t = k as f64 * dt;
        let theta = if k < opts.implicit_startup {
            1.0
        } else {
            opts.theta
        };
        u = advance(&disc, spec, &u, t, dt, theta)?;
        let t_next = if k + 1 == steps {
            spec.horizon
        } else {
            (k + 1) as f64 * dt
        };
        guard(&u, t_next)?;
        if opts.storage == Storage::All || k + 1 == steps {
            times.push(t_next);
            levels.push(u.clone());
        }
    }
    Ok(Trajectory {
        nodes: disc.nodes.clone(),
        times,
        levels,
    })
}

pub fn solve(spec: &ProblemSpec, mesh: &Mesh1D, dt: f64, theta_scheme: f64) -> Result<Trajectory> {
    solve_with(spec, mesh, &SolveOptions::new(dt, theta_scheme))
}

/// Like [`solve`] but keeps only the initial and final levels.
pub fn solve_final(
    spec: &ProblemSpec,
    mesh: &Mesh1D,
    dt: f64,
    theta_scheme: f64,
) -> Result<Trajectory> {
    let mut opts = SolveOptions::new(dt, theta_scheme);
    opts.storage = Storage::Endpoints;
    solve_with(spec, mesh, &opts)
}

/// Region over which residuals are measured: nodes with `d >= min_distance`
/// and levels with `t >= min_time`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualWindow {
    pub min_distance: f64,
    pub min_time: f64,
}

pub fn residual(spec: &ProblemSpec, mesh: &Mesh1D, traj: &Trajectory) -> Result<f64> {
    residual_in(spec, mesh, traj, ResidualWindow::default())
}

/// Max of `|∂t u - L u - f|` with centered time differences.
pub fn residual_in(
    spec: &ProblemSpec,
    mesh: &Mesh1D,
    traj: &Trajectory,
    window: ResidualWindow,
) -> Result<f64> {
    if traj.levels.len() < 3 {
        return Err(Error::Precondition(
            "residual needs at least three time levels".into(),
        ));
    }
    let disc = Discretization::new(spec, mesh)?;
    if traj.nodes.len() != disc.len() {
        return Err(Error::param(
            "trajectory",
            "node count does not match the mesh",
        ));
    }
    let mut worst: f64 = 0.0;
    for n in 1..traj.levels.len() - 1 {
        let t = traj.times[n];
        if t < window.min_time {
            continue;
        }
        let dtc = traj.times[n + 1] - traj.times[n - 1];
        let lu = disc.apply(&traj.levels[n], t);
        for i in 0..disc.len() {
            if disc.distances[i] < window.min_distance {
                continue;
            }
            let ut = (traj.levels[n + 1][i] - traj.levels[n - 1][i]) / dtc;
            let r = (ut - lu[i] - spec.source_at(disc.nodes[i], t)).abs();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Checks that `ψ_α(u)` is a discrete subsolution:
/// `∂t ψ(u) - L ψ(u) - ψ'(u) f <= 10 × residual` at every interior sample.
pub fn subsolution_check(
    traj: &Trajectory,
    alpha: f64,
    spec: &ProblemSpec,
    mesh: &Mesh1D,
) -> Result<ClassCertificate> {
    let psi = Regularizer::new(alpha)?;
    let res = residual(spec, mesh, traj)?;
    let disc = Discretization::new(spec, mesh)?;
    let tol = 10.0 * res + 1e-12;
    let mut cert = ClassCertificate::new("subsolution")
        .with_param("alpha", alpha)
        .with_param("pde_residual", res)
        .with_param("tolerance", tol);
    let map = |z: f64| psi.eval(z);
    let psi_levels: Vec<Vec<f64>> = traj
        .levels
        .iter()
        .map(|lvl| lvl.iter().map(|&z| psi.eval(z)).collect())
        .collect();
    for n in 1..traj.levels.len() - 1 {
        let t = traj.times[n];
        let dtc = traj.times[n + 1] - traj.times[n - 1];
        let lpsi = disc.apply_mapped(&psi_levels[n], t, &map);
        for i in 0..disc.len() {
            let dpsi = (psi_levels[n + 1][i] - psi_levels[n - 1][i]) / dtc;
            let f = spec.source_at(disc.nodes[i], t);
            let v = dpsi - lpsi[i] - psi.derivative(traj.levels[n][i]) * f;
            cert.observe(v, (disc.nodes[i], t));
        }
    }
    Ok(cert.finish(tol))
}
