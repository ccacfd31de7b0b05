use std::f64::consts::PI;

use dul::coefficients::DegenerateCoefficient;
use dul::experiments::{uniqueness_probe, ProbeConfig};
use dul::geometry::DomainGeometry;
use dul::solver::{build_mesh, solve, BoundaryTreatment, Discretization, ProblemSpec};
use dul::weighted_norms::{region_integral, Resolution, SliceMass};
use proptest::prelude::*;

fn unit() -> DomainGeometry {
    DomainGeometry::interval(0.0, 1.0).unwrap()
}

fn small() -> ProbeConfig {
    ProbeConfig {
        n_nodes: 128,
        steps: 32,
        ..ProbeConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flux_none_conserves_mass(
        gamma in 0.0f64..5.0,
        amp in 0.1f64..3.0,
        k in 1u32..4,
        theta in prop_oneof![Just(0.5), Just(1.0)],
    ) {
        let geom = unit();
        let coef = DegenerateCoefficient::new(gamma, amp).unwrap();
        let mesh = build_mesh(&geom, 128, 2.0).unwrap();
        let spec = ProblemSpec::homogeneous(coef, 0.2, BoundaryTreatment::DegenerateFluxNone)
            .with_initial(move |x| 1.0 + (k as f64 * PI * x).cos());
        let traj = solve(&spec, &mesh, 0.2 / 40.0, theta).unwrap();
        let disc = Discretization::new(&spec, &mesh).unwrap();
        for w in traj.levels.windows(2) {
            prop_assert!((disc.mass(&w[1]) - disc.mass(&w[0])).abs() <= 1e-10);
        }
    }

    #[test]
    fn implicit_steps_respect_initial_bounds(
        gamma in 0.0f64..5.0,
        lo in -2.0f64..0.0,
        hi in 0.0f64..2.0,
        dirichlet in any::<bool>(),
    ) {
        let geom = unit();
        let coef = DegenerateCoefficient::new(gamma, 1.0).unwrap();
        let mesh = build_mesh(&geom, 96, 2.0).unwrap();
        let bc = if dirichlet {
            BoundaryTreatment::Dirichlet { g_lo: lo, g_hi: hi }
        } else {
            BoundaryTreatment::DegenerateFluxNone
        };
        let spec = ProblemSpec::homogeneous(coef, 0.5, bc)
            .with_initial(move |x| lo + (hi - lo) * x);
        let traj = solve(&spec, &mesh, 0.5 / 32.0, 1.0).unwrap();
        for v in traj.levels.iter().flatten() {
            prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
        }
    }

    #[test]
    fn region_integral_monotone_in_eps(e1 in 0.01f64..0.45, e2 in 0.01f64..0.45, p in -0.9f64..1.0) {
        let geom = unit();
        let (a, b) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let u = move |x: f64, t: f64| (1.0 + t) * geom.distance(x).unwrap().max(1e-300).powf(p);
        let res = Resolution::default();
        let i = |e: f64| region_integral(&u, &geom, (e, f64::INFINITY), (0.0, 1.0), &|_| 1.0, res).unwrap();
        prop_assert!(i(a) >= i(b) * (1.0 - 1e-12));
    }
}

#[test]
fn probe_gaps_symmetric_under_pair_swap() {
    let geom = unit();
    let sweep = [0.2, 0.1, 0.05];
    for gamma in [0.5, 1.5] {
        let a = uniqueness_probe(gamma, &geom, (0.0, 1.0), &sweep, 0.25, &small()).unwrap();
        let b = uniqueness_probe(gamma, &geom, (1.0, 0.0), &sweep, 0.25, &small()).unwrap();
        for (x, y) in a.gaps.iter().zip(&b.gaps) {
            assert!((x - y).abs() <= 1e-12 * x.max(1.0), "{x} vs {y}");
        }
        assert_eq!(a.verdict, b.verdict);
    }
}

#[test]
fn probe_of_equal_data_is_zero() {
    let geom = unit();
    let r = uniqueness_probe(1.5, &geom, (0.7, 0.7), &[0.2, 0.1], 0.25, &small()).unwrap();
    assert!(r.gaps.iter().all(|&g| g == 0.0));
    assert_eq!(r.verdict.as_str(), "unique_trend");
}

#[test]
fn slice_mass_decreases_with_eps() {
    let geom = unit();
    let coef = DegenerateCoefficient::new(1.5, 1.0).unwrap();
    let mesh = build_mesh(&geom, 128, 2.0).unwrap();
    let spec = ProblemSpec::homogeneous(coef, 0.2, BoundaryTreatment::DegenerateFluxNone)
        .with_initial(|x| (3.0 * x).sin() - 0.4);
    let traj = solve(&spec, &mesh, 0.01, 1.0).unwrap();
    let m = SliceMass::new(&traj, &geom);
    for t in [0.0, 0.05, 0.2] {
        let vals: Vec<f64> = [0.0, 0.01, 0.05, 0.1, 0.3]
            .iter()
            .map(|&e| m.mass(e, t))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{vals:?}");
    }
}
