use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barriers::{
    select_subcritical_params, select_supercritical_params, verify_d2, verify_e2, BarrierConstants,
};
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::solver::Trajectory;
use crate::weighted_norms::{
    check_shell_class, geometric_schedule, telescoping_schedule, IterationCheck, Rung, SliceMass,
    TelescopingSchedule,
};

use super::probe::{clamp_pair_difference, ProbeConfig};
use super::DEFAULT_SWEEP;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplayConfig {
    pub probe: ProbeConfig,
    /// Clamp distance of the pair whose difference is replayed.
    pub clamp_eps: f64,
    /// First rung `ε_1`.
    pub eps: f64,
    /// Largest number of rungs the replay walks.
    pub rung_budget: u64,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            probe: ProbeConfig::default(),
            clamp_eps: 0.025,
            eps: 0.1,
            rung_budget: 1 << 23,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub gamma: f64,
    /// `θ` for `γ > 2`, `μ` for `γ ∈ [1, 2)`.
    pub parameter: f64,
    pub schedule: TelescopingSchedule,
    /// Certified cutoff constant from the shell claim.
    pub c1: f64,
    /// Class constant of `w` multiplying `C1`.
    pub class_constant: f64,
    pub c_hat: f64,
    /// Smallest `Ĉ` for which every rung would hold.
    pub c_hat_required: f64,
    pub rungs: u64,
    pub satisfied: u64,
    pub fraction: f64,
    /// Rungs whose cutoff support `Ω^{ε_k/2}` lies where `w` solves the
    /// equation, and how many of those hold.
    pub rungs_in_scope: u64,
    pub satisfied_in_scope: u64,
    pub first_failure: Option<Rung>,
    /// `∫_{Ω^ε} |w(τ)|`.
    pub mass_at_tau: f64,
    /// `Ĉ Σ ε_k^{μ2} + ∫_{Ω^{ε_{k0}/2}} |w(0)|`.
    pub telescoped_bound: f64,
    /// `tail_bound / (S ε^{μ2})`.
    pub tail_ratio: f64,
}

impl ReplayReport {
    pub fn all_hold(&self) -> bool {
        self.satisfied == self.rungs
    }
}

/// Builds the clamp pair difference at `cfg.clamp_eps` and replays it.
pub fn iteration_replay(
    gamma: f64,
    geom: &DomainGeometry,
    horizon: f64,
    theta_or_mu: f64,
    cfg: &ReplayConfig,
) -> Result<ReplayReport> {
    let coef = cfg.probe.coefficient(gamma)?;
    let w = clamp_pair_difference(&coef, geom, cfg.clamp_eps, (0.0, 1.0), horizon, &cfg.probe)?;
    iteration_replay_on(&w, gamma, geom, horizon, theta_or_mu, cfg)
}

/// Replays the telescoping iteration on a given difference `w`.
pub fn iteration_replay_on(
    w: &Trajectory,
    gamma: f64,
    geom: &DomainGeometry,
    horizon: f64,
    theta_or_mu: f64,
    cfg: &ReplayConfig,
) -> Result<ReplayReport> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("T", "must be positive"));
    }
    let coef = cfg.probe.coefficient(gamma)?;
    let eps = cfg.eps;
    let constants = BarrierConstants::from_problem(&coef, geom, eps)?;
    let mass = SliceMass::new(w, geom);
    let times = [0.0, 0.5 * horizon, horizon];
    let (schedule, c1, class_constant) = if gamma > 2.0 {
        let theta = theta_or_mu;
        let b = select_supercritical_params(gamma, constants, horizon, theta, eps)?;
        let tau = horizon.min(cfg.rung_budget as f64 * b.delta);
        let s = geometric_schedule(eps, gamma - 2.0, tau, b.delta)?;
        let c1 = verify_e2(&coef, geom, &DEFAULT_SWEEP, 256, &times)?.params["C1"];
        // the cutoff remainder is bounded by C1 ε^{γ-2} ∫∫ |w|
        (s, c1, space_time_mass(&mass))
    } else if (1.0..2.0).contains(&gamma) {
        let mu = theta_or_mu;
        let mu1 = 4.0 - 2.0 * gamma;
        if !(mu > mu1) {
            return Err(Error::Precondition(format!(
                "replay needs mu > 4 - 2*gamma = {mu1}, got {mu}"
            )));
        }
        let b = select_subcritical_params(gamma, constants, horizon, eps, None)?;
        let c_cap = b.delta / eps.powf(mu1);
        let target = (cfg.rung_budget as f64 / 2.0).ln() + EULER_GAMMA;
        let tau = horizon.min(target * c_cap * eps.powf(mu1));
        let s = telescoping_schedule(eps, mu1, mu, tau, c_cap)?;
        let c1 = verify_d2(&coef, geom, &DEFAULT_SWEEP, 256, &times)?.params["C1"];
        let class = check_shell_class(w, mu, &DEFAULT_SWEEP, geom, horizon, gamma)?;
        (s, c1, class.fitted_c)
    } else {
        return Err(Error::param(
            "gamma",
            "replay needs gamma > 2 or gamma in [1, 2)",
        ));
    };
    if !schedule.exact || schedule.k0 > cfg.rung_budget as f64 {
        return Err(Error::ScheduleCap {
            cap: cfg.rung_budget,
        });
    }
    let c_hat = c1 * class_constant;
    let mu2 = schedule.mu2;

    #[derive(Default)]
    struct Tally {
        rungs: u64,
        satisfied: u64,
        in_scope: u64,
        satisfied_in_scope: u64,
        required: f64,
        first_failure: Option<Rung>,
    }
    let mut tally = Tally::default();
    let mut last: Option<Rung> = None;
    let mut iter = schedule.rungs();
    loop {
        let chunk: Vec<Rung> = iter.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        last = chunk.last().copied();
        let rows: Vec<(Rung, IterationCheck, f64)> = chunk
            .par_iter()
            .map(|r| {
                let check = mass.check(r.eps_k, r.delta_k, r.tau_k, mu2, c_hat)?;
                let scale = r.eps_k.powf(mu2);
                let rhs0 = check.rhs - c_hat * scale;
                let need = if check.lhs <= rhs0 {
                    0.0
                } else if scale > 0.0 {
                    (check.lhs - rhs0) / scale
                } else {
                    f64::INFINITY
                };
                Ok((*r, check, need))
            })
            .collect::<Result<_>>()?;
        for (r, check, need) in rows {
            tally.rungs += 1;
            tally.required = tally.required.max(need);
            let in_scope = 0.5 * r.eps_k >= cfg.clamp_eps;
            if in_scope {
                tally.in_scope += 1;
            }
            if check.holds {
                tally.satisfied += 1;
                if in_scope {
                    tally.satisfied_in_scope += 1;
                }
            } else if tally.first_failure.is_none() {
                tally.first_failure = Some(r);
            }
        }
    }
    let last = last.ok_or(Error::ScheduleCap { cap: 0 })?;
    let tail = schedule.tail_bound;
    let majorant = schedule.majorant();
    Ok(ReplayReport {
        gamma,
        parameter: theta_or_mu,
        c1,
        class_constant,
        c_hat,
        c_hat_required: tally.required,
        rungs: tally.rungs,
        satisfied: tally.satisfied,
        fraction: tally.satisfied as f64 / tally.rungs as f64,
        rungs_in_scope: tally.in_scope,
        satisfied_in_scope: tally.satisfied_in_scope,
        first_failure: tally.first_failure,
        mass_at_tau: mass.mass(eps, schedule.tau),
        telescoped_bound: c_hat * tail + mass.mass(0.5 * last.eps_k, 0.0),
        tail_ratio: tail / majorant,
        schedule,
    })
}

/// `∫_0^T ∫_Ω |w|` by the trapezoid rule over stored levels.
fn space_time_mass(mass: &SliceMass) -> f64 {
    let ts = mass.times();
    (1..ts.len())
        .map(|n| 0.5 * (ts[n] - ts[n - 1]) * (mass.at_level(n - 1, 0.0) + mass.at_level(n, 0.0)))
        .sum()
}
