use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficients::{DegenerateCoefficient, Modulation, OperatorForm};
use crate::experiments::DEFAULT_SWEEP;
use crate::geometry::DomainGeometry;
use crate::solver::BoundaryTreatment;

use super::CliError;

/// Everything a run needs, read from a TOML file with named sections.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Recorded for reproducibility; no current computation samples randomly.
    #[serde(default)]
    pub seed: u64,
    pub geometry: Option<GeometryBlock>,
    pub coefficient: Option<CoefficientBlock>,
    #[serde(default)]
    pub barrier: BarrierBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub norms: NormsBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    /// `interval` or `disk`.
    pub kind: String,
    #[serde(default)]
    pub x_lo: f64,
    #[serde(default = "one")]
    pub x_hi: f64,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "two")]
    pub n: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientBlock {
    pub gamma: f64,
    /// `C0`; experiments fall back to the per-form default, other commands to 1.
    pub amplitude: Option<f64>,
    #[serde(default = "divergence")]
    pub form: OperatorForm,
    pub modulation: Option<ModulationBlock>,
    #[serde(default)]
    pub upper_exponent_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationBlock {
    pub m_lo: f64,
    pub m_hi: f64,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BarrierBlock {
    pub eps: f64,
    pub tau: f64,
    pub theta: f64,
    /// Exponent used at `γ = 2`.
    pub b: Option<f64>,
    pub alpha1: Option<f64>,
    pub delta: Option<f64>,
    pub delta_scale: f64,
    pub n_space: usize,
    pub n_time: usize,
    pub shell_sweep: Vec<f64>,
    pub shell_n_space: usize,
}

impl Default for BarrierBlock {
    fn default() -> Self {
        Self {
            eps: 0.1,
            tau: 1.0,
            theta: 1.0,
            b: None,
            alpha1: None,
            delta: None,
            delta_scale: 1.0,
            n_space: 10_000,
            n_time: 100,
            shell_sweep: DEFAULT_SWEEP.to_vec(),
            shell_n_space: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub n_nodes: usize,
    pub grading: f64,
    pub steps: usize,
    pub theta_scheme: f64,
    pub implicit_startup: usize,
    pub horizon: f64,
    pub treatment: BoundaryTreatment,
    /// Constant initial value.
    pub initial: f64,
    /// Number of evenly spaced levels written to the CSV.
    pub csv_levels: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self {
            n_nodes: 1024,
            grading: 2.0,
            steps: 512,
            theta_scheme: 1.0,
            implicit_startup: 0,
            horizon: 1.0,
            treatment: BoundaryTreatment::DegenerateFluxNone,
            initial: 0.0,
            csv_levels: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentBlock {
    /// `uniqueness_probe`, `nonuniqueness_demo`, `form_threshold_contrast`,
    /// `iteration_replay` or `existence_bound_check`.
    pub name: String,
    pub gammas: Vec<f64>,
    pub eps_sweep: Vec<f64>,
    pub g_pair: [f64; 2],
    pub horizon: f64,
    /// `θ` (γ > 2) or `μ` (γ in [1, 2)) for the replay.
    pub parameter: Option<f64>,
    pub refine: bool,
    pub clamp_eps: f64,
    pub replay_eps: f64,
    pub rung_budget: u64,
    pub beta: f64,
    pub tau_w: f64,
    pub t_run: f64,
}

impl Default for ExperimentBlock {
    fn default() -> Self {
        Self {
            name: "form_threshold_contrast".into(),
            gammas: vec![0.5, 1.5, 2.5],
            eps_sweep: DEFAULT_SWEEP.to_vec(),
            g_pair: [0.0, 1.0],
            horizon: 0.5,
            parameter: None,
            refine: false,
            clamp_eps: 0.025,
            replay_eps: 0.1,
            rung_budget: 1 << 23,
            beta: 2.0,
            tau_w: 1.0,
            t_run: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsBlock {
    pub snapshot: Option<PathBuf>,
    /// Overrides `coefficient.gamma`.
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub l: Option<f64>,
    pub eps_sweep: Vec<f64>,
}

impl Default for NormsBlock {
    fn default() -> Self {
        Self {
            snapshot: None,
            gamma: None,
            theta: None,
            mu: None,
            l: None,
            eps_sweep: DEFAULT_SWEEP.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn two() -> u32 {
    2
}

fn divergence() -> OperatorForm {
    OperatorForm::Divergence
}

impl RunConfig {
    /// Parses TOML text and applies `section.key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn geometry(&self) -> Result<DomainGeometry, CliError> {
        let g = self
            .geometry
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [geometry] block".into()))?;
        let out = match g.kind.as_str() {
            "interval" => DomainGeometry::interval(g.x_lo, g.x_hi),
            "disk" => DomainGeometry::disk_radial(g.radius, g.n),
            other => {
                return Err(CliError::Config(format!(
                    "geometry.kind: expected `interval` or `disk`, got `{other}`"
                )))
            }
        };
        out.map_err(|e| CliError::Config(format!("geometry: {e}")))
    }

    fn coefficient_block(&self) -> Result<&CoefficientBlock, CliError> {
        self.coefficient
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [coefficient] block".into()))
    }

    pub fn gamma(&self) -> Result<f64, CliError> {
        Ok(self.coefficient_block()?.gamma)
    }

    /// Coefficient with `amplitude` defaulting to `fallback`.
    pub fn coefficient(&self, fallback: f64) -> Result<DegenerateCoefficient, CliError> {
        let c = self.coefficient_block()?;
        let modulation = match c.modulation {
            None => Modulation::Constant,
            Some(m) => Modulation::Cosine {
                m_lo: m.m_lo,
                m_hi: m.m_hi,
                period: m.period,
            },
        };
        let coef = DegenerateCoefficient::with_modulation(
            c.gamma,
            c.amplitude.unwrap_or(fallback),
            modulation,
            c.form,
        )
        .map_err(|e| CliError::Config(format!("coefficient: {e}")))?;
        if c.upper_exponent_s != 0.0 {
            return coef
                .with_upper_exponent(c.upper_exponent_s)
                .map_err(|e| CliError::Config(format!("coefficient: {e}")));
        }
        Ok(coef)
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not KEY=VALUE")))?;
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for s in sections {
        let entry = cur
            .entry(s.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override `{key}`: `{s}` is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
