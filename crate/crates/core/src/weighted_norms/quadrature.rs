//! Composite Gauss–Legendre rules in the distance variable.

use std::sync::OnceLock;

use crate::geometry::{unit_sphere_area, DomainGeometry, DomainKind};

pub const GL_ORDER: usize = 8;
/// Dyadic refinement levels toward the inner end of a distance range.
const GEOMETRIC_LEVELS: usize = 48;
pub const DEFAULT_SPACE_NODES: usize = 2048;
pub const DEFAULT_TIME_PANELS: usize = 32;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

fn push_panel(out: &mut Vec<(f64, f64)>, a: f64, b: f64) {
    let (x, w) = gl8();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    for (xi, wi) in x.iter().zip(w) {
        out.push((mid + half * xi, half * wi));
    }
}

/// Rule for `∫_{lo}^{hi} g(s) ds` that resolves integrable power singularities
/// at `lo`: uniform panels, with the first panel split dyadically.
pub fn distance_rule(lo: f64, hi: f64, n_nodes: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if !(hi > lo) {
        return out;
    }
    let uniform = (n_nodes / GL_ORDER)
        .saturating_sub(GEOMETRIC_LEVELS + 1)
        .max(1);
    let h = (hi - lo) / uniform as f64;
    let mut right = lo + h;
    for _ in 0..GEOMETRIC_LEVELS {
        let left = lo + 0.5 * (right - lo);
        push_panel(&mut out, left, right);
        right = left;
    }
    push_panel(&mut out, lo, right);
    for j in 1..uniform {
        push_panel(&mut out, lo + h * j as f64, lo + h * (j + 1) as f64);
    }
    out
}

/// Uniform composite rule on `[a, b]`.
pub fn time_rule(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels * GL_ORDER);
    if !(b > a) {
        return out;
    }
    let h = (b - a) / panels as f64;
    for j in 0..panels {
        push_panel(&mut out, a + h * j as f64, a + h * (j + 1) as f64);
    }
    out
}

/// A point of a spatial rule: coordinate, distance to `∂Ω`, weight (including
/// the radial measure for the disk).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialNode {
    pub x: f64,
    pub d: f64,
    pub w: f64,
}

/// Rule for `∫_{d_lo < d(x) < d_hi} g(x) dx` over the domain.
pub fn region_rule(
    geom: &DomainGeometry,
    d_lo: f64,
    d_hi: f64,
    n_nodes: usize,
) -> Vec<SpatialNode> {
    let hi = d_hi.min(geom.max_distance());
    let lo = d_lo.max(0.0);
    let base = distance_rule(lo, hi, n_nodes);
    match geom.kind {
        DomainKind::Interval { x_lo, x_hi } => base
            .iter()
            .flat_map(|&(d, w)| {
                [
                    SpatialNode { x: x_lo + d, d, w },
                    SpatialNode { x: x_hi - d, d, w },
                ]
            })
            .collect(),
        DomainKind::DiskRadial { radius, n } => {
            let area = unit_sphere_area(n);
            base.iter()
                .map(|&(d, w)| {
                    let r = radius - d;
                    SpatialNode {
                        x: r,
                        d,
                        w: w * area * r.powi(n as i32 - 1),
                    }
                })
                .collect()
        }
    }
}
