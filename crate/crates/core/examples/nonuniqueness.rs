//! For `γ < 1` the boundary is reachable: two bounded solutions with the
//! same initial data and source, separated by their boundary values.

use dul::experiments::{nonuniqueness_demo, DemoConfig};
use dul::geometry::DomainGeometry;

fn main() -> dul::Result<()> {
    let geom = DomainGeometry::interval(0.0, 1.0)?;
    for gamma in [0.0, 0.5, 0.9] {
        let r = nonuniqueness_demo(gamma, &geom, 1.0, &DemoConfig::default())?;
        println!(
            "gamma {gamma}: separation {:.6} residuals {:.2e} / {:.2e} sup {:.3} / {:.3}",
            r.separation, r.residual_a, r.residual_b, r.sup_a, r.sup_b
        );
    }
    match nonuniqueness_demo(1.0, &geom, 1.0, &DemoConfig::default()) {
        Err(e) => println!("gamma 1: {e}"),
        Ok(_) => println!("gamma 1 unexpectedly accepted"),
    }
    Ok(())
}
