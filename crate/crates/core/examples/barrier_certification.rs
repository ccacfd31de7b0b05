//! Selects barrier parameters for a few exponents and certifies them on a
//! dense sample grid, then shows a negative control failing.

use dul::barriers::{
    normal_derivative_check, select_subcritical_params, select_supercritical_params, verify_d1,
    verify_d2, verify_e1, BarrierConstants, SampleGrid,
};
use dul::coefficients::DegenerateCoefficient;
use dul::geometry::DomainGeometry;

fn main() -> dul::Result<()> {
    let geom = DomainGeometry::interval(0.0, 1.0)?;
    let (eps, tau) = (0.1, 1.0);

    for gamma in [2.5, 3.0, 4.0] {
        let coef = DegenerateCoefficient::new(gamma, 1.0)?;
        let k = BarrierConstants::from_problem(&coef, &geom, eps)?;
        let b = select_supercritical_params(gamma, k, tau, 1.0, eps)?;
        let grid = SampleGrid::for_barrier(&geom, &b, 10_000, 100);
        let e1 = verify_e1(&b, &coef, &geom, &grid)?;
        println!(
            "gamma {gamma}: alpha1 {:.3e} delta {:.3e} invariants {} E1 {} (worst {:.3e})",
            b.alpha1,
            b.delta,
            b.invariants_hold(),
            e1.pass,
            e1.worst_value
        );
    }

    for (gamma, b_exp) in [(1.0, None), (1.5, None), (2.0, Some(1.0))] {
        let coef = DegenerateCoefficient::new(gamma, 1.0)?;
        let k = BarrierConstants::from_problem(&coef, &geom, eps)?;
        let b = select_subcritical_params(gamma, k, tau, eps, b_exp)?;
        let grid = SampleGrid::for_barrier(&geom, &b, 10_000, 100);
        let d1 = verify_d1(&b, &coef, &geom, &grid)?;
        let d2 = verify_d2(&coef, &geom, &[0.2, 0.1, 0.05, 0.025], 2000, &grid.times)?;
        let nd = normal_derivative_check(&b, &coef, &geom, &grid.times)?;
        println!(
            "gamma {gamma}: D1 {} D2 {} (C1 = {:.3}) normal derivative {}",
            d1.pass, d2.pass, d2.params["C1"], nd.pass
        );
    }

    // α1 = 1 is far below the admissible range
    let coef = DegenerateCoefficient::new(4.0, 1.0)?;
    let k = BarrierConstants::from_problem(&coef, &geom, eps)?;
    let b = select_supercritical_params(4.0, k, tau, 1.0, eps)?.with_alpha1(1.0);
    let grid = SampleGrid::for_barrier(&geom, &b, 10_000, 100);
    let e1 = verify_e1(&b, &coef, &geom, &grid)?;
    println!(
        "alpha1 = 1: E1 {} with worst value {:.3e}",
        e1.pass, e1.worst_value
    );
    Ok(())
}
