//! Growth-class checks on closed-form fields.

use dul::geometry::DomainGeometry;
use dul::weighted_norms::{
    check_pointwise_growth, check_shell_class, check_supercritical_class, weighted_l1,
    WeightFunction,
};

fn main() -> dul::Result<()> {
    let geom = DomainGeometry::interval(0.0, 1.0)?;
    let sweep = [0.2, 0.1, 0.05, 0.025];
    let horizon = 1.0;

    let one = |_: f64, _: f64| 1.0;
    for theta in [0.1, 1.0, 10.0] {
        let r = check_supercritical_class(&one, theta, 4.0, &sweep, &geom, horizon)?;
        println!(
            "u = 1, theta {theta}: pass {} fitted C {:.3e}",
            r.pass, r.fitted_c
        );
    }

    let dist = geom;
    let singular = move |x: f64, _: f64| dist.distance(x).unwrap_or(0.0).powf(-0.3);
    let r = check_shell_class(&singular, 0.5, &sweep, &geom, horizon, 1.8)?;
    println!(
        "u = d^-0.3, gamma 1.8, mu 0.5: pass {} fitted C {:.4}",
        r.pass, r.fitted_c
    );
    for (e, (lhs, bound)) in r
        .eps_values
        .iter()
        .zip(r.lhs_values.iter().zip(&r.bound_values))
    {
        println!("  eps {e}: lhs {lhs:.4e} bound {bound:.4e}");
    }

    let steep = move |x: f64, _: f64| dist.distance(x).unwrap_or(0.0).powf(-0.5);
    let l = 3.0 * 1.8 - 5.0;
    let p = check_pointwise_growth(&steep, l, &geom, horizon)?;
    println!("u = d^-0.5 against l = {l:.1}: holds {}", p.holds);

    let w = WeightFunction::power(-0.5)?;
    let m = weighted_l1(&one, &w, &geom, horizon)?;
    println!("int d^-1/2 = {m:.10} (exact {:.10})", 2.0 * 2f64.sqrt());
    Ok(())
}
