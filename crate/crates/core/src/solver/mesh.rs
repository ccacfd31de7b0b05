use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, DomainKind};

/// Graded 1-D node set in the open domain.
///
/// A uniform reference coordinate `ξ_j = (j - 1/2)/m` is mapped to distances
/// `d_j = H·ξ_j^p` (`p` = grading), so nodes cluster at the boundary and never
/// touch the boundary, the interval midpoint or the disk center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub geom: DomainGeometry,
    pub nodes: Vec<f64>,
    pub grading: f64,
}

pub const MIN_NODES: usize = 16;

pub fn build_mesh(geom: &DomainGeometry, n_nodes: usize, grading: f64) -> Result<Mesh1D> {
    if n_nodes < MIN_NODES {
        return Err(Error::param(
            "n_nodes",
            format!("need at least {MIN_NODES}"),
        ));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::param("grading", "must be finite and >= 1"));
    }
    let nodes = match geom.kind {
        DomainKind::Interval { x_lo, x_hi } => {
            if n_nodes % 2 != 0 {
                return Err(Error::param(
                    "n_nodes",
                    "interval meshes need an even node count",
                ));
            }
            let m = n_nodes / 2;
            let half = 0.5 * (x_hi - x_lo);
            let dists: Vec<f64> = (1..=m)
                .map(|j| half * ((j as f64 - 0.5) / m as f64).powf(grading))
                .collect();
            let mut nodes: Vec<f64> = dists.iter().map(|d| x_lo + d).collect();
            nodes.extend(dists.iter().rev().map(|d| x_hi - d));
            nodes
        }
        DomainKind::DiskRadial { radius, .. } => (1..=n_nodes)
            .rev()
            .map(|j| radius - radius * ((j as f64 - 0.5) / n_nodes as f64).powf(grading))
            .collect(),
    };
    Ok(Mesh1D {
        geom: *geom,
        nodes,
        grading,
    })
}

impl Mesh1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Distance of each node to the boundary.
    pub fn distances(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&x| self.geom.distance(x).expect("mesh nodes lie in the domain"))
            .collect()
    }

    /// Refined mesh with twice the nodes and the same grading.
    pub fn refined(&self) -> Result<Mesh1D> {
        build_mesh(&self.geom, 2 * self.len(), self.grading)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_interval_mesh_is_equispaced() {
        let g = DomainGeometry::interval(0.0, 1.0).unwrap();
        let m = build_mesh(&g, 16, 1.0).unwrap();
        assert_eq!(m.len(), 16);
        for h in m.spacings() {
            assert_relative_eq!(h, 1.0 / 16.0, epsilon = 1e-14);
        }
        assert_relative_eq!(m.nodes[0], 1.0 / 32.0, epsilon = 1e-15);
        assert!(!m.nodes.iter().any(|&x| x == 0.5));
    }

    #[test]
    fn graded_interval_spacing_ratio() {
        let g = DomainGeometry::interval(0.0, 1.0).unwrap();
        let m = build_mesh(&g, 256, 2.0).unwrap();
        let h = m.spacings();
        let hmin = h.iter().cloned().fold(f64::INFINITY, f64::min);
        let hmax = h.iter().cloned().fold(0.0, f64::max);
        let ratio = hmin / hmax;
        // smallest spacing is O(n^-2), largest O(n^-1)
        assert!(ratio > 0.5 / 256.0 && ratio < 4.0 / 256.0, "ratio {ratio}");
        assert!(hmin < 1e-4);
        assert!(h.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn disk_mesh_clusters_at_outer_boundary() {
        let g = DomainGeometry::disk_radial(1.0, 2).unwrap();
        let m = build_mesh(&g, 64, 2.0).unwrap();
        assert!(m.nodes.iter().all(|&r| r > 0.0 && r < 1.0));
        let h = m.spacings();
        assert!(h.iter().all(|&s| s > 0.0));
        assert!(h[h.len() - 1] < h[0]);
    }

    #[test]
    fn rejects_bad_input() {
        let g = DomainGeometry::interval(0.0, 1.0).unwrap();
        assert!(build_mesh(&g, 8, 1.0).is_err());
        assert!(build_mesh(&g, 32, 0.5).is_err());
        assert!(build_mesh(&g, 33, 1.0).is_err());
    }
}
