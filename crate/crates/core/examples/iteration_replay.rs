//! Replays the telescoping iteration rung by rung on a computed difference
//! of two clamped solutions.

use dul::experiments::{iteration_replay, ReplayConfig};
use dul::geometry::DomainGeometry;

fn main() -> dul::Result<()> {
    let geom = DomainGeometry::interval(0.0, 1.0)?;
    let cfg = ReplayConfig::default();
    for (gamma, parameter) in [(1.5, 1.2), (4.0, 1.0)] {
        let r = iteration_replay(gamma, &geom, 0.5, parameter, &cfg)?;
        println!("gamma {gamma} (parameter {parameter}):");
        println!(
            "  rungs {} held {} ({:.4})",
            r.rungs, r.satisfied, r.fraction
        );
        println!(
            "  in scope {} held {}",
            r.rungs_in_scope, r.satisfied_in_scope
        );
        println!("  C_hat {:.4} required {:.4}", r.c_hat, r.c_hat_required);
        println!("  tail / majorant {:.4}", r.tail_ratio);
        if let Some(f) = r.first_failure {
            println!("  first failure at k = {} (eps_k = {:.3e})", f.k, f.eps_k);
        }
    }
    Ok(())
}
