//! Builds a telescoping schedule and compares the tail with its zeta
//! majorant.

use dul::weighted_norms::{geometric_schedule, telescoping_schedule, zeta};

fn main() -> dul::Result<()> {
    let (eps, mu1, mu2) = (0.1, 1.0, 1.5);
    for tau in [0.05, 0.5, 10.0] {
        let s = telescoping_schedule(eps, mu1, mu2, tau, 1.0)?;
        println!(
            "tau {tau}: k0 {:.6e} exact {} tail {:.6e} majorant {:.6e} (zeta({}) = {:.6})",
            s.k0,
            s.exact,
            s.tail_bound,
            s.majorant(),
            mu2 / mu1,
            zeta(mu2 / mu1)
        );
    }

    let s = telescoping_schedule(eps, mu1, mu2, 0.5, 1.0)?;
    println!("k,eps_k,delta_k,tau_k");
    for r in s.materialize(6) {
        println!("{},{:.6},{:.6},{:.6}", r.k, r.eps_k, r.delta_k, r.tau_k);
    }
    let sum: f64 = s.rungs().map(|r| r.delta_k).sum();
    println!("sum of steps {sum} against tau {}", s.tau);

    let g = geometric_schedule(eps, 2.0, 0.01, 1e-4)?;
    println!("geometric: {} rungs, tail {:.3e}", g.k0, g.tail_bound);

    match telescoping_schedule(eps, 1.5, 1.0, 0.5, 1.0) {
        Err(e) => println!("mu2 <= mu1 rejected: {e}"),
        Ok(_) => println!("mu2 <= mu1 unexpectedly accepted"),
    }
    Ok(())
}
