//! Clamp pairs with data 0 and 1 on `∂Ω^ε`: the gap on a fixed interior set
//! vanishes as `ε → 0` when the boundary is invisible and persists otherwise.
//! The second half contrasts divergence and nondivergence forms.

use dul::experiments::{
    form_threshold_contrast, probe_refinement, write_contrast_csv, ProbeConfig, DEFAULT_SWEEP,
};
use dul::geometry::DomainGeometry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let geom = DomainGeometry::interval(0.0, 1.0)?;
    let cfg = ProbeConfig::default();
    for gamma in [0.5, 1.5] {
        let r = probe_refinement(gamma, &geom, (0.0, 1.0), &DEFAULT_SWEEP, 0.5, &cfg)?;
        println!(
            "gamma {gamma}: gaps {:?} ratio {:.3} -> {} (refined: {}, largest change {:.2}%)",
            r.coarse.gaps,
            r.coarse.ratio,
            r.coarse.verdict.as_str(),
            r.fine.verdict.as_str(),
            100.0 * r.max_relative_change()
        );
    }

    let rows = form_threshold_contrast(&geom, &[0.5, 1.5, 2.5], &DEFAULT_SWEEP, 0.5, &cfg)?;
    write_contrast_csv(&rows, std::io::stdout())?;
    Ok(())
}
