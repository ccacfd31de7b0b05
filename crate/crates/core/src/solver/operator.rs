use std::ops::Range;

use crate::coefficients::{DegenerateCoefficient, OperatorForm};
use crate::error::{Error, Result};
use crate::geometry::DomainKind;

use super::mesh::Mesh1D;
use super::tridiag::Tridiagonal;
use super::{BoundaryTreatment, GridFunction, ProblemSpec};

/// Spatial operator frozen for one problem and mesh.
///
/// `L(t)u = m(t)·(A u + b)` where `A` is tridiagonal and `b` carries boundary
/// data. Cells are bounded by midpoints between nodes; a side without data is
/// closed at the boundary point, a side with data couples the end node to the
/// data point through the exact harmonic transmissibility `1/∫dx/a`.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub active: Range<usize>,
    pub nodes: Vec<f64>,
    pub distances: Vec<f64>,
    pub volumes: Vec<f64>,
    coefficient: DegenerateCoefficient,
    matrix: Tridiagonal,
    data_vector: Vec<f64>,
    row_scale: Vec<f64>,
    face: Vec<f64>,
    left: Option<(f64, f64)>,
    right: Option<(f64, f64)>,
}

struct Side {
    /// Coordinate of the boundary (or clamp) point.
    point: f64,
    /// Distance to `∂Ω` of that point.
    dist: f64,
    data: Option<f64>,
}

fn integral_inverse_power(gamma: f64, d0: f64, d1: f64) -> f64 {
    let (lo, hi) = if d0 <= d1 { (d0, d1) } else { (d1, d0) };
    if gamma == 0.0 {
        return hi - lo;
    }
    if lo == 0.0 && gamma >= 1.0 {
        return f64::INFINITY;
    }
    if gamma == 1.0 {
        (hi / lo).ln()
    } else {
        (hi.powf(1.0 - gamma) - lo.powf(1.0 - gamma)) / (1.0 - gamma)
    }
}

impl Discretization {
    pub fn new(spec: &ProblemSpec, mesh: &Mesh1D) -> Result<Self> {
        spec.validate()?;
        let geom = &mesh.geom;
        let coef = spec.coefficient;
        let all_d = mesh.distances();

        let (clamp, g_lo, g_hi) = match spec.boundary {
            BoundaryTreatment::DegenerateFluxNone => (None, None, None),
            BoundaryTreatment::Dirichlet { g_lo, g_hi } => (None, Some(g_lo), Some(g_hi)),
            BoundaryTreatment::ClampAtEps { eps, g_lo, g_hi } => {
                (Some(eps), Some(g_lo), Some(g_hi))
            }
        };
        let eps = clamp.unwrap_or(0.0);
        if eps >= geom.max_distance() {
            return Err(Error::param("eps", "clamp distance exceeds the domain"));
        }

        let (lo_side, hi_side) = match geom.kind {
            DomainKind::Interval { x_lo, x_hi } => (
                Side {
                    point: x_lo + eps,
                    dist: eps,
                    data: g_lo,
                },
                Side {
                    point: x_hi - eps,
                    dist: eps,
                    data: g_hi,
                },
            ),
            DomainKind::DiskRadial { radius, .. } => (
                Side {
                    point: 0.0,
                    dist: radius,
                    data: None,
                },
                Side {
                    point: radius - eps,
                    dist: eps,
                    data: g_hi,
                },
            ),
        };

        // Nodes within a relative hair of the clamp point are dropped.
        let margin = eps * 1e-9;
        let first = all_d.iter().position(|&d| d > eps + margin);
        let last = all_d.iter().rposition(|&d| d > eps + margin);
        let active = match (first, last) {
            (Some(a), Some(b)) if b >= a + 2 => a..b + 1,
            _ => {
                return Err(Error::param(
                    "n_nodes",
                    "fewer than three nodes remain inside the clamped region",
                ))
            }
        };
        let nodes: Vec<f64> = mesh.nodes[active.clone()].to_vec();
        let distances: Vec<f64> = all_d[active.clone()].to_vec();
        let m = nodes.len();

        let dim = match geom.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::DiskRadial { n, .. } => n as i32,
        };
        let metric = |r: f64| if dim == 1 { 1.0 } else { r.abs().powi(dim - 1) };
        let measure = |e0: f64, e1: f64| {
            if dim == 1 {
                e1 - e0
            } else {
                (e1.powi(dim) - e0.powi(dim)) / dim as f64
            }
        };

        let mut edges = Vec::with_capacity(m + 1);
        edges.push(match lo_side.data {
            Some(_) => 0.5 * (lo_side.point + nodes[0]),
            None => lo_side.point,
        });
        for w in nodes.windows(2) {
            edges.push(0.5 * (w[0] + w[1]));
        }
        edges.push(match hi_side.data {
            Some(_) => 0.5 * (hi_side.point + nodes[m - 1]),
            None => hi_side.point,
        });
        let volumes: Vec<f64> = edges.windows(2).map(|e| measure(e[0], e[1])).collect();

        let a_node: Vec<f64> = distances.iter().map(|&d| coef.spatial(d)).collect();
        let divergence = coef.form == OperatorForm::Divergence;

        let face: Vec<f64> = (0..m - 1)
            .map(|i| {
                let w = if divergence {
                    (a_node[i] * a_node[i + 1]).sqrt()
                } else {
                    1.0
                };
                metric(edges[i + 1]) * w / (nodes[i + 1] - nodes[i])
            })
            .collect();

        let boundary_conductance = |side: &Side, node: usize, edge: f64| -> f64 {
            if divergence {
                let resistance =
                    integral_inverse_power(coef.gamma, side.dist, distances[node]) / coef.amplitude;
                metric(edge) / resistance
            } else {
                metric(edge) / (nodes[node] - side.point).abs()
            }
        };
        let left = lo_side
            .data
            .map(|g| (boundary_conductance(&lo_side, 0, edges[0]), g));
        let right = hi_side
            .data
            .map(|g| (boundary_conductance(&hi_side, m - 1, edges[m]), g));

        let row_scale: Vec<f64> = (0..m)
            .map(|i| {
                if divergence {
                    1.0 / volumes[i]
                } else {
                    a_node[i] / volumes[i]
                }
            })
            .collect();

        let mut matrix = Tridiagonal::zeros(m);
        let mut data_vector = vec![0.0; m];
        for i in 0..m {
            let s = row_scale[i];
            let mut diag = 0.0;
            if i > 0 {
                matrix.lower[i] = s * face[i - 1];
                diag -= s * face[i - 1];
            }
            if i + 1 < m {
                matrix.upper[i] = s * face[i];
                diag -= s * face[i];
            }
            if i == 0 {
                if let Some((k, g)) = left {
                    diag -= s * k;
                    data_vector[i] += s * k * g;
                }
            }
            if i == m - 1 {
                if let Some((k, g)) = right {
                    diag -= s * k;
                    data_vector[i] += s * k * g;
                }
            }
            matrix.diag[i] = diag;
        }

        Ok(Self {
            active,
            nodes,
            distances,
            volumes,
            coefficient: coef,
            matrix,
            data_vector,
            row_scale,
            face,
            left,
            right,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn modulation(&self, t: f64) -> f64 {
        self.coefficient.modulation.eval(t)
    }

    /// Time-independent part `A` of the operator.
    pub fn matrix(&self) -> &Tridiagonal {
        &self.matrix
    }

    /// Time-independent part `b` carrying boundary data.
    pub fn data_vector(&self) -> &[f64] {
        &self.data_vector
    }

    /// Largest `|A_ii|`, used for the explicit stability bound.
    pub fn max_diagonal(&self) -> f64 {
        self.matrix.diag.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, u: &[f64], t: f64) -> GridFunction {
        self.apply_mapped(u, t, &|g| g)
    }

    /// Applies the operator with boundary data replaced by `map(g)`.
    pub fn apply_mapped(&self, u: &[f64], t: f64, map: &dyn Fn(f64) -> f64) -> GridFunction {
        let m = self.len();
        let mt = self.modulation(t);
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut flux = 0.0;
            if i > 0 {
                flux += self.face[i - 1] * (u[i - 1] - u[i]);
            }
            if i + 1 < m {
                flux += self.face[i] * (u[i + 1] - u[i]);
            }
            if i == 0 {
                if let Some((k, g)) = self.left {
                    if k > 0.0 {
                        flux += k * (map(g) - u[i]);
                    }
                }
            }
            if i == m - 1 {
                if let Some((k, g)) = self.right {
                    if k > 0.0 {
                        flux += k * (map(g) - u[i]);
                    }
                }
            }
            out[i] = mt * self.row_scale[i] * flux;
        }
        out
    }

    /// `Σ V_i u_i` (for the disk, without the sphere-area factor).
    pub fn mass(&self, u: &[f64]) -> f64 {
        self.volumes.iter().zip(u).map(|(v, x)| v * x).sum()
    }
}

/// Evaluates the discrete operator on one level (boundary data included).
pub fn apply_operator(
    spec: &ProblemSpec,
    mesh: &Mesh1D,
    u_level: &[f64],
    t: f64,
) -> Result<GridFunction> {
    let disc = Discretization::new(spec, mesh)?;
    if u_level.len() != disc.len() {
        return Err(Error::param(
            "u_level",
            "length does not match the active nodes",
        ));
    }
    Ok(disc.apply(u_level, t))
}
