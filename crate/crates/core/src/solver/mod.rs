//! Finite-volume evolution of `∂t u = div(a∇u) + f` (or `aΔu + f`) on graded
//! 1-D meshes.

mod mesh;
mod operator;
mod stepping;
mod trajectory;
mod tridiag;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coefficients::DegenerateCoefficient;
use crate::error::{Error, Result};

pub use mesh::{build_mesh, Mesh1D, MIN_NODES};
pub use operator::{apply_operator, Discretization};
pub use stepping::{
    residual, residual_in, solve, solve_final, solve_with, step_theta, subsolution_check,
    ResidualWindow, SolveOptions, Storage, DEFAULT_STEPS,
};
pub use trajectory::{GridFunction, Trajectory, SNAPSHOT_MAGIC};
pub use tridiag::Tridiagonal;

/// How the boundary is handled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryTreatment {
    /// No data and no boundary face: zero flux through the boundary.
    DegenerateFluxNone,
    /// Data on `∂Ω`. The disk uses `g_hi` on the outer circle.
    Dirichlet { g_lo: f64, g_hi: f64 },
    /// Data on `∂Ω^ε`; only `Ω^ε` is solved.
    ClampAtEps { eps: f64, g_lo: f64, g_hi: f64 },
}

pub type SourceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type InitialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ProblemSpec {
    pub coefficient: DegenerateCoefficient,
    /// `None` means `f ≡ 0`.
    pub source: Option<SourceFn>,
    pub initial: InitialFn,
    pub horizon: f64,
    pub boundary: BoundaryTreatment,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("coefficient", &self.coefficient)
            .field("source", &self.source.as_ref().map(|_| "fn"))
            .field("horizon", &self.horizon)
            .field("boundary", &self.boundary)
            .finish()
    }
}

impl ProblemSpec {
    /// Homogeneous problem: `u0 = 0`, `f = 0`.
    pub fn homogeneous(
        coefficient: DegenerateCoefficient,
        horizon: f64,
        boundary: BoundaryTreatment,
    ) -> Self {
        Self {
            coefficient,
            source: None,
            initial: Arc::new(|_| 0.0),
            horizon,
            boundary,
        }
    }

    pub fn with_initial(mut self, u0: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.initial = Arc::new(u0);
        self
    }

    pub fn with_source(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self
    }

    pub fn source_at(&self, x: f64, t: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |f| f(x, t))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("T", "horizon must be positive"));
        }
        match self.boundary {
            BoundaryTreatment::DegenerateFluxNone => {}
            BoundaryTreatment::Dirichlet { g_lo, g_hi } => {
                if !(g_lo.is_finite() && g_hi.is_finite()) {
                    return Err(Error::param("boundary", "data must be finite"));
                }
            }
            BoundaryTreatment::ClampAtEps { eps, g_lo, g_hi } => {
                if !(eps > 0.0 && eps.is_finite()) {
                    return Err(Error::param("eps", "clamp distance must be positive"));
                }
                if !(g_lo.is_finite() && g_hi.is_finite()) {
                    return Err(Error::param("boundary", "data must be finite"));
                }
            }
        }
        Ok(())
    }
}
