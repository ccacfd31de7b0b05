use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{DegenerateCoefficient, OperatorForm};
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::solver::{build_mesh, solve, BoundaryTreatment, ProblemSpec, Trajectory};
use crate::weighted_norms::SliceMass;

/// Verdict thresholds on `gap(ε_min) / gap(ε_max)`.
pub const UNIQUE_RATIO: f64 = 0.2;
pub const NONUNIQUE_RATIO: f64 = 0.8;

/// Probe amplitude `C0` when none is given. The verdict depends on `C0·T`,
/// and the two forms need different values to resolve at `T = 0.5`.
pub fn default_amplitude(form: OperatorForm) -> f64 {
    match form {
        OperatorForm::Divergence => 1.5,
        OperatorForm::Nondivergence => 4.0,
    }
}

/// Discretization and coefficient choices shared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub form: OperatorForm,
    /// `C0`; `None` picks [`default_amplitude`].
    pub amplitude: Option<f64>,
    pub n_nodes: usize,
    pub grading: f64,
    pub steps: usize,
    pub theta_scheme: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            form: OperatorForm::Divergence,
            amplitude: None,
            n_nodes: 1024,
            grading: 2.0,
            steps: 512,
            theta_scheme: 1.0,
        }
    }
}

impl ProbeConfig {
    pub fn with_form(mut self, form: OperatorForm) -> Self {
        self.form = form;
        self
    }

    /// Twice the nodes and twice the steps.
    pub fn refined(mut self) -> Self {
        self.n_nodes *= 2;
        self.steps *= 2;
        self
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
            .unwrap_or_else(|| default_amplitude(self.form))
    }

    pub fn coefficient(&self, gamma: f64) -> Result<DegenerateCoefficient> {
        Ok(DegenerateCoefficient::new(gamma, self.amplitude())?.with_form(self.form))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    UniqueTrend,
    NonuniqueTrend,
    Inconclusive,
}

impl Verdict {
    /// Applies the fixed thresholds to gaps ordered by decreasing `ε`.
    pub fn classify(gaps: &[f64]) -> Self {
        let first = gaps[0];
        let last = gaps[gaps.len() - 1];
        if first == 0.0 && last == 0.0 {
            return Self::UniqueTrend;
        }
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
        if last < UNIQUE_RATIO * first && monotone {
            Self::UniqueTrend
        } else if last > NONUNIQUE_RATIO * first {
            Self::NonuniqueTrend
        } else {
            Self::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::UniqueTrend => "unique_trend",
            Self::NonuniqueTrend => "nonunique_trend",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub gamma: f64,
    pub form: OperatorForm,
    pub amplitude: f64,
    pub horizon: f64,
    pub g_pair: (f64, f64),
    pub eps_sweep: Vec<f64>,
    pub eps_ref: f64,
    /// `‖u_a(T) - u_b(T)‖_{L¹(Ω^{ε_ref})}` per swept `ε`.
    pub gaps: Vec<f64>,
    /// `gap(ε_min) / gap(ε_max)`.
    pub ratio: f64,
    /// `ln(gap_{i+1}/gap_i) / ln(ε_{i+1}/ε_i)`.
    pub rates: Vec<f64>,
    pub verdict: Verdict,
}

impl DichotomyReport {
    /// Rows `eps,gap`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "eps,gap")?;
        for (e, g) in self.eps_sweep.iter().zip(&self.gaps) {
            writeln!(w, "{e},{g}")?;
        }
        Ok(())
    }
}

pub(crate) fn validate_sweep(sweep: &[f64], geom: &DomainGeometry) -> Result<()> {
    if sweep.is_empty() {
        return Err(Error::param("eps_sweep", "empty sweep"));
    }
    if sweep.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::param("eps_sweep", "must be strictly decreasing"));
    }
    if sweep.iter().any(|&e| !(e > 0.0) || e >= geom.eps0) {
        return Err(Error::param(
            "eps_sweep",
            format!("values must lie in (0, {})", geom.eps0),
        ));
    }
    Ok(())
}

/// Solves the clamped problem with constant data `g` on `∂Ω^ε`, `u0 = 0`.
pub fn clamped_solution(
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    eps: f64,
    g: f64,
    horizon: f64,
    cfg: &ProbeConfig,
) -> Result<Trajectory> {
    let mesh = build_mesh(geom, cfg.n_nodes, cfg.grading)?;
    let spec = ProblemSpec::homogeneous(
        *coef,
        horizon,
        BoundaryTreatment::ClampAtEps {
            eps,
            g_lo: g,
            g_hi: g,
        },
    );
    solve(&spec, &mesh, horizon / cfg.steps as f64, cfg.theta_scheme)
}

/// Levelwise `a - b` of two trajectories on the same nodes and times.
pub fn difference(a: &Trajectory, b: &Trajectory) -> Result<Trajectory> {
    if a.nodes != b.nodes || a.times != b.times {
        return Err(Error::param(
            "trajectory",
            "pair must share nodes and times",
        ));
    }
    let levels = a
        .levels
        .iter()
        .zip(&b.levels)
        .map(|(p, q)| p.iter().zip(q).map(|(x, y)| x - y).collect())
        .collect();
    Ok(Trajectory {
        nodes: a.nodes.clone(),
        times: a.times.clone(),
        levels,
    })
}

/// `u_a - u_b` for the clamp pair at `eps`.
pub fn clamp_pair_difference(
    coef: &DegenerateCoefficient,
    geom: &DomainGeometry,
    eps: f64,
    g_pair: (f64, f64),
    horizon: f64,
    cfg: &ProbeConfig,
) -> Result<Trajectory> {
    let (a, b) = rayon::join(
        || clamped_solution(coef, geom, eps, g_pair.0, horizon, cfg),
        || clamped_solution(coef, geom, eps, g_pair.1, horizon, cfg),
    );
    difference(&a?, &b?)
}

pub fn uniqueness_probe(
    gamma: f64,
    geom: &DomainGeometry,
    g_pair: (f64, f64),
    eps_sweep: &[f64],
    horizon: f64,
    cfg: &ProbeConfig,
) -> Result<DichotomyReport> {
    validate_sweep(eps_sweep, geom)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::param("T", "must be positive"));
    }
    let coef = cfg.coefficient(gamma)?;
    let eps_ref = eps_sweep[0];
    let gaps = eps_sweep
        .par_iter()
        .map(|&eps| {
            let w = clamp_pair_difference(&coef, geom, eps, g_pair, horizon, cfg)?;
            let last = Trajectory {
                nodes: w.nodes.clone(),
                times: vec![horizon],
                levels: vec![w.final_level().clone()],
            };
            Ok(SliceMass::new(&last, geom).at_level(0, eps_ref))
        })
        .collect::<Result<Vec<f64>>>()?;
    let rates = eps_sweep
        .windows(2)
        .zip(gaps.windows(2))
        .map(|(e, g)| (g[1] / g[0]).ln() / (e[1] / e[0]).ln())
        .collect();
    let first = gaps[0];
    let last = gaps[gaps.len() - 1];
    Ok(DichotomyReport {
        gamma,
        form: cfg.form,
        amplitude: cfg.amplitude(),
        horizon,
        g_pair,
        eps_sweep: eps_sweep.to_vec(),
        eps_ref,
        verdict: Verdict::classify(&gaps),
        ratio: if first > 0.0 { last / first } else { 0.0 },
        rates,
        gaps,
    })
}

/// A probe and its rerun at twice the nodes and steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse: DichotomyReport,
    pub fine: DichotomyReport,
    /// `|gap_fine - gap_coarse| / gap_fine` per swept `ε`.
    pub relative_changes: Vec<f64>,
    pub same_verdict: bool,
}

impl RefinementReport {
    pub fn max_relative_change(&self) -> f64 {
        self.relative_changes.iter().copied().fold(0.0, f64::max)
    }
}

pub fn probe_refinement(
    gamma: f64,
    geom: &DomainGeometry,
    g_pair: (f64, f64),
    eps_sweep: &[f64],
    horizon: f64,
    cfg: &ProbeConfig,
) -> Result<RefinementReport> {
    let (coarse, fine) = rayon::join(
        || uniqueness_probe(gamma, geom, g_pair, eps_sweep, horizon, cfg),
        || uniqueness_probe(gamma, geom, g_pair, eps_sweep, horizon, &cfg.refined()),
    );
    let (coarse, fine) = (coarse?, fine?);
    let relative_changes = coarse
        .gaps
        .iter()
        .zip(&fine.gaps)
        .map(|(c, f)| {
            if *f == 0.0 {
                (c - f).abs()
            } else {
                (c - f).abs() / f
            }
        })
        .collect();
    Ok(RefinementReport {
        same_verdict: coarse.verdict == fine.verdict,
        relative_changes,
        coarse,
        fine,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastRow {
    pub form: OperatorForm,
    pub gamma: f64,
    pub amplitude: f64,
    pub ratio: f64,
    pub verdict: Verdict,
}

/// Probes both operator forms at every `γ` (each form with its own default
/// amplitude unless `cfg.amplitude` is set).
pub fn form_threshold_contrast(
    geom: &DomainGeometry,
    gammas: &[f64],
    eps_sweep: &[f64],
    horizon: f64,
    cfg: &ProbeConfig,
) -> Result<Vec<ContrastRow>> {
    let jobs: Vec<(OperatorForm, f64)> = [OperatorForm::Divergence, OperatorForm::Nondivergence]
        .iter()
        .flat_map(|&f| gammas.iter().map(move |&g| (f, g)))
        .collect();
    jobs.par_iter()
        .map(|&(form, gamma)| {
            let c = cfg.with_form(form);
            let r = uniqueness_probe(gamma, geom, (0.0, 1.0), eps_sweep, horizon, &c)?;
            Ok(ContrastRow {
                form,
                gamma,
                amplitude: r.amplitude,
                ratio: r.ratio,
                verdict: r.verdict,
            })
        })
        .collect()
}

/// Rows `form,gamma,amplitude,ratio,verdict`.
pub fn write_contrast_csv<W: Write>(rows: &[ContrastRow], mut w: W) -> io::Result<()> {
    writeln!(w, "form,gamma,amplitude,ratio,verdict")?;
    for r in rows {
        let form = match r.form {
            OperatorForm::Divergence => "divergence",
            OperatorForm::Nondivergence => "nondivergence",
        };
        writeln!(
            w,
            "{form},{},{},{},{}",
            r.gamma,
            r.amplitude,
            r.ratio,
            r.verdict.as_str()
        )?;
    }
    Ok(())
}
