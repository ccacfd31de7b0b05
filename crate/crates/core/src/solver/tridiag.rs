use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. `lower[0]` and `upper[n-1]` are
/// ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Thomas elimination without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        assert_eq!(rhs.len(), n, "right-hand side length mismatch");
        if n == 0 {
            return Ok(vec![]);
        }
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: 0 });
        }
        c[0] = self.upper[0] / pivot;
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::SingularSystem { row: i });
            }
            if i + 1 < n {
                c[i] = self.upper[i] / pivot;
            }
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn singular_first_row() {
        let m = Tridiagonal::zeros(3);
        assert_eq!(
            m.solve(&[1.0, 1.0, 1.0]),
            Err(Error::SingularSystem { row: 0 })
        );
    }

    proptest! {
        #[test]
        fn diagonally_dominant_systems_solve(n in 1usize..40, seed in 0u64..1000) {
            let mut m = Tridiagonal::zeros(n);
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                let s = (seed as f64 + i as f64).sin();
                m.lower[i] = if i > 0 { -0.4 + 0.1 * s } else { 0.0 };
                m.upper[i] = if i + 1 < n { -0.3 - 0.1 * s } else { 0.0 };
                m.diag[i] = 1.0 + m.lower[i].abs() + m.upper[i].abs() + s.abs();
                rhs[i] = (i as f64 * 0.7 + seed as f64).cos();
            }
            let x = m.solve(&rhs).unwrap();
            let back = m.mul_vec(&x);
            for i in 0..n {
                prop_assert!((back[i] - rhs[i]).abs() < 1e-12);
            }
        }
    }
}
