//! Command-line front end: `verify-barrier`, `solve`, `experiment`,
//! `norm-check` and `schedule`.
//!
//! Exit codes: 0 pass, 1 a certified check failed or the computation broke
//! down, 2 invalid configuration, 3 I/O failure.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{
    BarrierBlock, CoefficientBlock, ExperimentBlock, GeometryBlock, ModulationBlock, NormsBlock,
    OutputBlock, RunConfig, SolverBlock,
};
pub use output::{output_root, RunDir, SCHEMA_VERSION};

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Compute(_) => 1,
            Self::Config(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter { .. }
            | Error::InadmissibleConstants { .. }
            | Error::Precondition(_)
            | Error::Domain { .. }
            | Error::Cfl { .. } => Self::Config(e.to_string()),
            _ => Self::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "dul", version, about = "Degenerate parabolic uniqueness lab")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select barrier parameters and certify the barrier inequalities.
    VerifyBarrier(RunArgs),
    /// Evolve one problem and write the trajectory.
    Solve(RunArgs),
    /// Run a named experiment.
    Experiment(ExperimentArgs),
    /// Check growth classes of a stored trajectory.
    NormCheck(RunArgs),
    /// Print the telescoping schedule.
    Schedule(ScheduleArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// TOML config file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override any config key, e.g. `--set barrier.eps=0.05`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub delta_scale: Option<f64>,
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Output root (`output.dir`); `DUL_OUTPUT_DIR` takes precedence.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl RunArgs {
    /// Named flags as `section.key=value` overrides, applied after `--set`.
    fn overrides(&self, command: &str) -> Vec<String> {
        let mut out = self.set.clone();
        let mut push = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push(format!("{key}={v}"));
            }
        };
        let num = |v: Option<f64>| v.map(|x| format!("{x:?}"));
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| toml_string(&p.display().to_string()));
        push("coefficient.gamma", num(self.gamma));
        push("barrier.eps", num(self.eps));
        push("barrier.alpha1", num(self.alpha1));
        push("barrier.delta", num(self.delta));
        push("barrier.delta_scale", num(self.delta_scale));
        if command == "norm-check" {
            push("norms.theta", num(self.theta));
            push("norms.mu", num(self.mu));
        } else if command == "experiment" {
            push("experiment.parameter", num(self.theta.or(self.mu)));
        } else {
            push("barrier.theta", num(self.theta));
        }
        push("norms.snapshot", path(&self.snapshot));
        push("output.dir", path(&self.output));
        out
    }

    pub fn load(&self, command: &str) -> Result<RunConfig, CliError> {
        self.load_with(command, Vec::new())
    }

    fn load_with(&self, command: &str, extra: Vec<String>) -> Result<RunConfig, CliError> {
        let text = match &self.config {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut overrides = self.overrides(command);
        overrides.extend(extra);
        RunConfig::from_toml(&text, &overrides)
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// `probe`, `demo`, `contrast`, `replay` or `existence` (long names also
    /// accepted); defaults to `experiment.name`.
    pub name: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
}

impl ExperimentArgs {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        let extra = self
            .name
            .iter()
            .map(|n| format!("experiment.name={}", toml_string(n)))
            .collect();
        self.run.load_with("experiment", extra)
    }
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Power kind: `ε_k = ε k^{-1/μ1}`.
    #[arg(long, default_value_t = 1.0)]
    pub mu1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu2: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_cap: f64,
    /// Geometric kind `ε_k = ε 2^{1-k}` with constant step `--c-cap`, exponent `--mu2`.
    #[arg(long)]
    pub geometric: bool,
    /// Most rungs printed.
    #[arg(long, default_value_t = 100)]
    pub limit: usize,
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(j) = cli.jobs {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global();
    }
    match commands::dispatch(&cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
