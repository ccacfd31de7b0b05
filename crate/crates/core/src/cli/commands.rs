use std::io::{self, Write};

use serde::Serialize;

use crate::barriers::{
    normal_derivative_check, select_subcritical_params, select_supercritical_params, verify_d1,
    verify_d2, verify_e1, verify_e2, Barrier, BarrierConstants, SampleGrid,
};
use crate::certificate::ClassCertificate;
use crate::coefficients::{EnvelopeCertificate, OperatorForm};
use crate::experiments::{
    existence_bound_check, form_threshold_contrast, iteration_replay, nonuniqueness_demo,
    probe_refinement, uniqueness_probe, write_contrast_csv, DemoConfig, ProbeConfig, ReplayConfig,
    Verdict,
};
use crate::solver::{build_mesh, solve_with, ProblemSpec, SolveOptions, Trajectory};
use crate::weighted_norms::{
    check_pointwise_growth, check_shell_class, check_supercritical_class, geometric_schedule,
    telescoping_schedule, GrowthReport, PointwiseGrowth,
};

use super::config::RunConfig;
use super::output::{display, RunDir};
use super::{CliError, Command, ScheduleArgs};

/// Demo acceptance: separation above this and both residuals below
/// [`DEMO_RESIDUAL`].
const DEMO_SEPARATION: f64 = 0.05;
const DEMO_RESIDUAL: f64 = 1e-3;

type Outcome = Result<bool, CliError>;

pub(super) fn dispatch(cmd: &Command) -> Outcome {
    match cmd {
        Command::VerifyBarrier(a) => verify_barrier(&a.load("verify-barrier")?),
        Command::Solve(a) => solve(&a.load("solve")?),
        Command::Experiment(a) => experiment(&a.load()?),
        Command::NormCheck(a) => norm_check(&a.load("norm-check")?),
        Command::Schedule(a) => schedule(a),
    }
}

fn finish<T: Serialize>(dir: &RunDir, pass: bool, report: &T) -> Outcome {
    let p = dir.write_report(pass, report)?;
    dir.log(&format!("pass = {pass}"))?;
    println!("{}", display(&p));
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

fn write_certificates(dir: &RunDir, certs: &[&ClassCertificate]) -> io::Result<()> {
    dir.write_with("certificates.csv", |w| {
        writeln!(w, "claim,pass,worst_value,worst_x,worst_t,grid_size")?;
        for c in certs {
            let (x, t) = c.worst_point.unwrap_or((f64::NAN, f64::NAN));
            writeln!(
                w,
                "{},{},{},{},{},{}",
                c.claim, c.pass, c.worst_value, x, t, c.grid_size
            )?;
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Serialize)]
struct BarrierReport<B: Serialize> {
    barrier: B,
    invariants_hold: bool,
    envelope: EnvelopeCertificate,
    certificates: Vec<ClassCertificate>,
}

fn verify_barrier(cfg: &RunConfig) -> Outcome {
    let geom = cfg.geometry()?;
    let coef = cfg.coefficient(1.0)?;
    let b = &cfg.barrier;
    if !(b.delta_scale > 0.0) {
        return Err(CliError::Config(
            "barrier.delta_scale must be positive".into(),
        ));
    }
    let k = BarrierConstants::from_problem(&coef, &geom, b.eps)?;
    let gamma = coef.gamma;
    let dir = RunDir::create("verify-barrier", cfg)?;
    dir.log(&format!("verify-barrier gamma = {gamma}"))?;

    fn run<B: Barrier + Sync + Serialize>(
        barrier: B,
        invariants_hold: bool,
        cfg: &RunConfig,
        dir: &RunDir,
        claim: impl Fn(&B, &SampleGrid) -> crate::Result<ClassCertificate>,
        shell: impl Fn(&[f64]) -> crate::Result<ClassCertificate>,
    ) -> Outcome {
        let geom = cfg.geometry()?;
        let coef = cfg.coefficient(1.0)?;
        let b = &cfg.barrier;
        let grid = SampleGrid::for_barrier(&geom, &barrier, b.n_space, b.n_time);
        let samples: Vec<(f64, f64)> = grid
            .points
            .iter()
            .step_by((grid.points.len() / 1000).max(1))
            .flat_map(|&x| grid.times.iter().map(move |&t| (x, t)))
            .collect();
        let envelope = coef.certify_a3(&geom, &samples)?;
        let c1 = claim(&barrier, &grid)?;
        let c2 = shell(&grid.times)?;
        let nd = normal_derivative_check(&barrier, &coef, &geom, &grid.times)?;
        write_certificates(dir, &[&c1, &c2, &nd])?;
        for c in [&c1, &c2, &nd] {
            println!(
                "{}: {} (worst {:e})",
                c.claim,
                if c.pass { "pass" } else { "fail" },
                c.worst_value
            );
        }
        let pass = envelope.pass && c1.pass && c2.pass && nd.pass;
        let report = BarrierReport {
            barrier,
            invariants_hold,
            envelope,
            certificates: vec![c1, c2, nd],
        };
        finish(dir, pass, &report)
    }

    let sweep = b.shell_sweep.clone();
    let n_shell = b.shell_n_space;
    if gamma > 2.0 {
        let mut sel = select_supercritical_params(gamma, k, b.tau, b.theta, b.eps)?;
        if let Some(a) = b.alpha1 {
            sel = sel.with_alpha1(a);
        }
        sel = sel.with_delta(b.delta.unwrap_or(sel.delta) * b.delta_scale);
        let inv = sel.invariants_hold();
        run(
            sel,
            inv,
            cfg,
            &dir,
            |s, g| verify_e1(s, &coef, &geom, g),
            |times| verify_e2(&coef, &geom, &sweep, n_shell, times),
        )
    } else if (1.0..=2.0).contains(&gamma) {
        let mut sel = select_subcritical_params(gamma, k, b.tau, b.eps, b.b)?;
        if let Some(a) = b.alpha1 {
            sel = sel.with_alpha1(a);
        }
        sel = sel.with_delta(b.delta.unwrap_or(sel.delta) * b.delta_scale);
        let inv = sel.invariants_hold();
        run(
            sel,
            inv,
            cfg,
            &dir,
            |s, g| verify_d1(s, &coef, &geom, g),
            |times| verify_d2(&coef, &geom, &sweep, n_shell, times),
        )
    } else {
        Err(CliError::Config(format!(
            "coefficient.gamma = {gamma}: barriers exist only for gamma >= 1"
        )))
    }
}

#[derive(Serialize)]
struct SolveReport {
    n_nodes: usize,
    n_levels: usize,
    final_time: f64,
    max_abs: f64,
    snapshot: String,
    csv: String,
}

fn solve(cfg: &RunConfig) -> Outcome {
    let geom = cfg.geometry()?;
    let coef = cfg.coefficient(1.0)?;
    let s = &cfg.solver;
    if s.steps == 0 {
        return Err(CliError::Config("solver.steps must be positive".into()));
    }
    let mesh = build_mesh(&geom, s.n_nodes, s.grading)?;
    let u0 = s.initial;
    let spec = ProblemSpec::homogeneous(coef, s.horizon, s.treatment).with_initial(move |_| u0);
    spec.validate()?;
    let mut opts = SolveOptions::new(s.horizon / s.steps as f64, s.theta_scheme);
    opts.implicit_startup = s.implicit_startup;
    let dir = RunDir::create("solve", cfg)?;
    dir.log("solve")?;
    let traj = solve_with(&spec, &mesh, &opts)?;
    let snap = dir.file("trajectory.dul");
    traj.save_snapshot(&snap)?;
    let sub = subsample(&traj, s.csv_levels);
    dir.write_with("trajectory.csv", |w| sub.write_csv(w))?;
    let report = SolveReport {
        n_nodes: traj.nodes.len(),
        n_levels: traj.levels.len(),
        final_time: traj.final_time(),
        max_abs: traj.max_abs(),
        snapshot: "trajectory.dul".into(),
        csv: "trajectory.csv".into(),
    };
    finish(&dir, true, &report)
}

/// About `count` evenly spaced levels, always including the first and last.
fn subsample(traj: &Trajectory, count: usize) -> Trajectory {
    let n = traj.levels.len();
    let m = count.clamp(2, n.max(2));
    let mut idx: Vec<usize> = (0..m).map(|j| j * (n - 1) / (m - 1)).collect();
    idx.dedup();
    Trajectory {
        nodes: traj.nodes.clone(),
        times: idx.iter().map(|&i| traj.times[i]).collect(),
        levels: idx.iter().map(|&i| traj.levels[i].clone()).collect(),
    }
}

fn probe_config(cfg: &RunConfig) -> ProbeConfig {
    let s = &cfg.solver;
    let c = cfg.coefficient.as_ref();
    ProbeConfig {
        form: c.map_or(OperatorForm::Divergence, |c| c.form),
        amplitude: c.and_then(|c| c.amplitude),
        n_nodes: s.n_nodes,
        grading: s.grading,
        steps: s.steps,
        theta_scheme: s.theta_scheme,
    }
}

#[derive(Serialize)]
struct ContrastReport {
    rows: Vec<crate::experiments::ContrastRow>,
    /// `γ` values where the divergence form trends unique and the
    /// nondivergence form does not.
    flips: Vec<f64>,
}

fn experiment(cfg: &RunConfig) -> Outcome {
    let geom = cfg.geometry()?;
    let e = &cfg.experiment;
    let probe = probe_config(cfg);
    let name = match e.name.as_str() {
        "probe" | "uniqueness_probe" => "probe",
        "demo" | "nonuniqueness_demo" => "demo",
        "contrast" | "form_threshold_contrast" => "contrast",
        "replay" | "iteration_replay" => "replay",
        "existence" | "existence_bound_check" => "existence",
        other => {
            return Err(CliError::Config(format!(
                "experiment.name: unknown experiment `{other}`"
            )))
        }
    };
    // validate before creating the run directory
    let gamma = if name == "contrast" {
        None
    } else {
        Some(cfg.gamma()?)
    };
    let dir = RunDir::create(&format!("experiment-{name}"), cfg)?;
    dir.log(&format!("experiment {name}"))?;
    let g_pair = (e.g_pair[0], e.g_pair[1]);
    match (name, gamma) {
        ("probe", Some(gamma)) => {
            if e.refine {
                let r = probe_refinement(gamma, &geom, g_pair, &e.eps_sweep, e.horizon, &probe)?;
                dir.write_with("gaps.csv", |w| r.coarse.write_csv(w))?;
                println!("verdict: {}", r.coarse.verdict.as_str());
                let pass = r.same_verdict && r.coarse.verdict != Verdict::Inconclusive;
                finish(&dir, pass, &r)
            } else {
                let r = uniqueness_probe(gamma, &geom, g_pair, &e.eps_sweep, e.horizon, &probe)?;
                dir.write_with("gaps.csv", |w| r.write_csv(w))?;
                println!("verdict: {} (ratio {:.4})", r.verdict.as_str(), r.ratio);
                finish(&dir, r.verdict != Verdict::Inconclusive, &r)
            }
        }
        ("demo", Some(gamma)) => {
            let mut demo = DemoConfig::from(&probe);
            demo.implicit_startup = demo.implicit_startup.max(cfg.solver.implicit_startup);
            let r = nonuniqueness_demo(gamma, &geom, e.horizon, &demo)?;
            println!(
                "separation {:.6}, residuals {:.2e} / {:.2e}",
                r.separation, r.residual_a, r.residual_b
            );
            let pass = r.separation > DEMO_SEPARATION
                && r.residual_a < DEMO_RESIDUAL
                && r.residual_b < DEMO_RESIDUAL;
            finish(&dir, pass, &r)
        }
        ("contrast", _) => {
            let mut probe = probe;
            probe.amplitude = None;
            let rows = form_threshold_contrast(&geom, &e.gammas, &e.eps_sweep, e.horizon, &probe)?;
            dir.write_with("contrast.csv", |w| write_contrast_csv(&rows, w))?;
            let verdict = |form, g| {
                rows.iter()
                    .find(|r| r.form == form && r.gamma == g)
                    .map(|r| r.verdict)
            };
            let flips: Vec<f64> = e
                .gammas
                .iter()
                .copied()
                .filter(|&g| {
                    verdict(OperatorForm::Divergence, g) == Some(Verdict::UniqueTrend)
                        && verdict(OperatorForm::Nondivergence, g) == Some(Verdict::NonuniqueTrend)
                })
                .collect();
            for r in &rows {
                println!("{:?} gamma={} {}", r.form, r.gamma, r.verdict.as_str());
            }
            let pass = !flips.is_empty();
            finish(&dir, pass, &ContrastReport { rows, flips })
        }
        ("replay", Some(gamma)) => {
            let parameter = e.parameter.ok_or_else(|| {
                CliError::Config("experiment.parameter (theta or mu) is required for replay".into())
            })?;
            let rc = ReplayConfig {
                probe,
                clamp_eps: e.clamp_eps,
                eps: e.replay_eps,
                rung_budget: e.rung_budget,
            };
            let r = iteration_replay(gamma, &geom, e.horizon, parameter, &rc)?;
            println!("{} of {} rungs hold", r.satisfied, r.rungs);
            finish(&dir, r.all_hold(), &r)
        }
        ("existence", Some(gamma)) => {
            let r = existence_bound_check(gamma, e.beta, e.tau_w, e.t_run, &geom, &probe)?;
            println!(
                "C_hat {:.5} -> {:.5}, lambda {:.5} -> {:.5}",
                r.coarse.c_hat, r.fine.c_hat, r.coarse.lambda, r.fine.lambda
            );
            finish(&dir, r.stable, &r)
        }
        _ => unreachable!("gamma is resolved for every experiment but contrast"),
    }
}

#[derive(Serialize, Default)]
struct NormReport {
    snapshot: String,
    horizon: f64,
    gamma: Option<f64>,
    exponential_class: Option<GrowthReport>,
    shell_class: Option<GrowthReport>,
    pointwise: Option<PointwiseGrowth>,
}

fn norm_check(cfg: &RunConfig) -> Outcome {
    let geom = cfg.geometry()?;
    let n = &cfg.norms;
    let path = n
        .snapshot
        .as_ref()
        .ok_or_else(|| CliError::Config("norms.snapshot is required".into()))?;
    if n.theta.is_none() && n.mu.is_none() && n.l.is_none() {
        return Err(CliError::Config(
            "norm-check needs at least one of norms.theta, norms.mu, norms.l".into(),
        ));
    }
    let gamma = match n.gamma {
        Some(g) => Some(g),
        None if n.theta.is_some() || n.mu.is_some() => Some(cfg.gamma().map_err(|_| {
            CliError::Config("norm-check needs norms.gamma or coefficient.gamma".into())
        })?),
        None => None,
    };
    let traj = Trajectory::load_snapshot(path)
        .map_err(|e| CliError::Io(format!("cannot read snapshot {}: {e}", path.display())))?;
    let horizon = traj.final_time();
    if !(horizon > 0.0) {
        return Err(CliError::Config("snapshot spans no time".into()));
    }
    let mut report = NormReport {
        snapshot: display(path),
        horizon,
        gamma,
        ..NormReport::default()
    };
    let dir = RunDir::create("norm-check", cfg)?;
    dir.log(&format!("norm-check {}", display(path)))?;
    let mut pass = true;
    if let (Some(theta), Some(g)) = (n.theta, gamma) {
        let r = check_supercritical_class(&traj, theta, g, &n.eps_sweep, &geom, horizon)?;
        println!(
            "exponential class: {}",
            if r.pass { "pass" } else { "fail" }
        );
        pass &= r.pass;
        dir.write_with("exponential_class.csv", |w| r.write_csv(w))?;
        report.exponential_class = Some(r);
    }
    if let (Some(mu), Some(g)) = (n.mu, gamma) {
        let r = check_shell_class(&traj, mu, &n.eps_sweep, &geom, horizon, g)?;
        println!("shell class: {}", if r.pass { "pass" } else { "fail" });
        pass &= r.pass;
        dir.write_with("shell_class.csv", |w| r.write_csv(w))?;
        report.shell_class = Some(r);
    }
    if let Some(l) = n.l {
        let r = check_pointwise_growth(&traj, l, &geom, horizon)?;
        println!(
            "pointwise growth: {}",
            if r.holds { "pass" } else { "fail" }
        );
        pass &= r.holds;
        report.pointwise = Some(r);
    }
    finish(&dir, pass, &report)
}

fn schedule(a: &ScheduleArgs) -> Outcome {
    let s = if a.geometric {
        geometric_schedule(a.eps, a.mu2, a.tau, a.c_cap)?
    } else {
        telescoping_schedule(a.eps, a.mu1, a.mu2, a.tau, a.c_cap)?
    };
    let out = io::stdout();
    let mut w = out.lock();
    writeln!(w, "k,eps_k,delta_k,tau_k")?;
    let mut shown = 0usize;
    for r in s.rungs().take(a.limit) {
        writeln!(w, "{},{},{},{}", r.k, r.eps_k, r.delta_k, r.tau_k)?;
        shown += 1;
    }
    if s.exact {
        writeln!(w, "# k0 = {}", s.k0)?;
    } else {
        writeln!(w, "# k0 = {:e}", s.k0)?;
    }
    writeln!(w, "# ln_k0 = {}", s.ln_k0)?;
    writeln!(w, "# exact = {}", s.exact)?;
    writeln!(w, "# rows shown = {shown}")?;
    writeln!(w, "# tail_bound = {:e}", s.tail_bound)?;
    writeln!(w, "# majorant = {:e}", s.majorant())?;
    Ok(true)
}
