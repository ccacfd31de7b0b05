//! Numerical companion for uniqueness and nonuniqueness of bounded solutions
//! to degenerate parabolic equations `∂t u = div(a∇u) + f` with
//! `a ~ d(x)^γ` near the boundary.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] gives closed-form distance fields;
//! * [`coefficients`] builds `a(x,t) = m(t) C0 d^γ` and its envelope constants;
//! * [`barriers`] selects barrier parameters and certifies the barrier
//!   inequalities by dense sampling;
//! * [`weighted_norms`] evaluates weighted integrals, growth classes and the
//!   telescoping schedule;
//! * [`solver`] evolves the equation on graded meshes;
//! * [`experiments`] composes all of the above;
//! * [`cli`] reads configs and writes run directories.

pub mod barriers;
pub mod certificate;
pub mod cli;
pub mod coefficients;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod solver;
pub mod weighted_norms;

pub use error::{Error, Result};
