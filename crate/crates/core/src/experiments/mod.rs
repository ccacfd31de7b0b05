//! Experiments built from the solver, barriers and weighted norms: the
//! uniqueness dichotomy, two bounded solutions for `γ < 1`, the contrast
//! between operator forms, replay of the telescoping iteration, and the
//! envelope of solutions with growing data.

mod demo;
mod existence;
mod probe;
mod replay;

pub use demo::{nonuniqueness_demo, DemoConfig, NonuniquenessReport};
pub use existence::{existence_bound_check, EnvelopeFit, ExistenceReport, FIT_TOLERANCE};
pub use probe::{
    clamp_pair_difference, clamped_solution, default_amplitude, difference,
    form_threshold_contrast, probe_refinement, uniqueness_probe, write_contrast_csv, ContrastRow,
    DichotomyReport, ProbeConfig, RefinementReport, Verdict, NONUNIQUE_RATIO, UNIQUE_RATIO,
};
pub use replay::{iteration_replay, iteration_replay_on, ReplayConfig, ReplayReport};

/// The `ε` sweep used by default throughout.
pub const DEFAULT_SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
