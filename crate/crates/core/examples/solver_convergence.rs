//! Manufactured solution `u* = e^{-t} sin(πx)` with `a ≡ 1`, followed by a
//! degenerate run checking conservation and the maximum principle.

use std::f64::consts::PI;

use dul::coefficients::DegenerateCoefficient;
use dul::geometry::DomainGeometry;
use dul::solver::{build_mesh, solve, BoundaryTreatment, Discretization, ProblemSpec};

fn main() -> dul::Result<()> {
    let geom = DomainGeometry::interval(0.0, 1.0)?;
    let heat = DegenerateCoefficient::new(0.0, 1.0)?;
    let horizon = 0.5;
    let mut prev: Option<(f64, f64)> = None;
    println!("n,h,error,order");
    for n in [32, 64, 128, 256] {
        let mesh = build_mesh(&geom, n, 1.0)?;
        let spec = ProblemSpec::homogeneous(
            heat,
            horizon,
            BoundaryTreatment::Dirichlet {
                g_lo: 0.0,
                g_hi: 0.0,
            },
        )
        .with_initial(|x| (PI * x).sin())
        .with_source(|x, t| (PI * PI - 1.0) * (-t).exp() * (PI * x).sin());
        let h = 1.0 / n as f64;
        let traj = solve(&spec, &mesh, h, 0.5)?;
        let err = traj
            .nodes
            .iter()
            .zip(traj.final_level())
            .map(|(x, u)| (u - (-horizon).exp() * (PI * x).sin()).abs())
            .fold(0.0, f64::max);
        let order = prev.map_or(f64::NAN, |(h0, e0)| (e0 / err).ln() / (h0 / h).ln());
        println!("{n},{h:.5},{err:.3e},{order:.3}");
        prev = Some((h, err));
    }

    // γ = 4, no boundary condition, f = 0
    let coef = DegenerateCoefficient::new(4.0, 1.0)?;
    let mesh = build_mesh(&geom, 512, 2.0)?;
    let spec = ProblemSpec::homogeneous(coef, 1.0, BoundaryTreatment::DegenerateFluxNone)
        .with_initial(|x| 0.5 + 0.5 * (2.0 * PI * x).cos());
    let traj = solve(&spec, &mesh, 1.0 / 256.0, 1.0)?;
    let disc = Discretization::new(&spec, &mesh)?;
    let masses: Vec<f64> = traj.levels.iter().map(|l| disc.mass(l)).collect();
    let drift = masses
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let (lo, hi) = traj
        .levels
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    println!("largest mass change per step: {drift:.2e}");
    println!("values stay in [{lo:.3e}, {hi:.6}]");
    Ok(())
}
