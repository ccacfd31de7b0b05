//! Data growing like `exp(d^β/τ_w)` toward the boundary: the solution stays
//! under an envelope `Ĉ exp(d^β/(τ_w - λt))`.

use dul::experiments::{existence_bound_check, ProbeConfig};
use dul::geometry::DomainGeometry;

fn main() -> dul::Result<()> {
    let geom = DomainGeometry::interval(0.0, 1.0)?;
    let r = existence_bound_check(4.0, 2.0, 1.0, 0.5, &geom, &ProbeConfig::default())?;
    println!("lambda range [0, {}]", r.lambda_max);
    for f in [r.coarse, r.fine] {
        println!(
            "n {} steps {}: C_hat {:.5} lambda {:.5}",
            f.n_nodes, f.steps, f.c_hat, f.lambda
        );
    }
    println!("stable under refinement: {}", r.stable);
    Ok(())
}
