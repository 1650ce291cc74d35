//! Spectral factorization of a symmetric positive (semi)definite matrix.
//!
//! The matrix is first equilibrated, `B = D^{-1/2} A D^{-1/2}` with
//! `D = diag(A)`, and `B = Q diag(lambda) Q^T` is computed. Quadratic forms in
//! `A^{-1}` become `sum_k (q_k . D^{-1/2} v)^2 / lambda_k`, a sum of
//! non-negative terms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, Clone)]
pub(crate) struct SpectralFactor {
    inv_sqrt_diag: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

/// Row-major dense square matrix into nalgebra.
pub(crate) fn to_dmatrix(dim: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(dim, dim, data)
}

impl SpectralFactor {
    pub fn new(matrix: &DMatrix<f64>) -> Self {
        let dim = matrix.nrows();
        let inv_sqrt_diag: Vec<f64> = (0..dim)
            .map(|i| {
                let d = matrix[(i, i)];
                if d > 0.0 && d.is_finite() {
                    1.0 / d.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let mut scaled = matrix.clone();
        for j in 0..dim {
            for i in 0..dim {
                scaled[(i, j)] *= inv_sqrt_diag[i] * inv_sqrt_diag[j];
            }
        }
        // keep the input exactly symmetric for the solver
        for j in 0..dim {
            for i in 0..j {
                let avg = 0.5 * (scaled[(i, j)] + scaled[(j, i)]);
                scaled[(i, j)] = avg;
                scaled[(j, i)] = avg;
            }
        }
        let eig = SymmetricEigen::new(scaled);
        SpectralFactor {
            inv_sqrt_diag,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.inv_sqrt_diag.len()
    }

    /// Extreme eigenvalues of the equilibrated matrix.
    pub fn scaled_extremes(&self) -> (f64, f64) {
        let min = self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (min, max)
    }

    /// True when the equilibrated matrix is numerically positive definite.
    pub fn is_positive_definite(&self) -> bool {
        let (min, max) = self.scaled_extremes();
        min > self.dim() as f64 * f64::EPSILON * max
    }

    /// Coordinates `Q^T D^{-1/2} v`.
    fn coordinates(&self, v: &[f64]) -> DVector<f64> {
        let scaled = DVector::from_iterator(v.len(), v.iter().zip(&self.inv_sqrt_diag).map(|(x, s)| x * s));
        self.eigenvectors.tr_mul(&scaled)
    }

    /// `v^T A^{-1} v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let u = self.coordinates(v);
        u.iter().zip(&self.eigenvalues).map(|(x, l)| x * x / l).sum()
    }

    /// `v^T A^{-1} w`.
    pub fn bilinear_form(&self, v: &[f64], w: &[f64]) -> f64 {
        let (a, b) = (self.coordinates(v), self.coordinates(w));
        a.iter().zip(b.iter()).zip(&self.eigenvalues).map(|((x, y), l)| x * y / l).sum()
    }

    /// `A^{-1} v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let mut u = self.coordinates(v);
        for (x, l) in u.iter_mut().zip(&self.eigenvalues) {
            *x /= l;
        }
        let back = &self.eigenvectors * u;
        back.iter().zip(&self.inv_sqrt_diag).map(|(x, s)| x * s).collect()
    }
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub(crate) fn eigenvalue_range(matrix: &DMatrix<f64>) -> (f64, f64) {
    let values = matrix.clone().symmetric_eigenvalues();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_explicit_inverse_on_spd_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0]);
        let inv = a.clone().try_inverse().unwrap();
        let f = SpectralFactor::new(&a);
        assert!(f.is_positive_definite());
        let v = [0.3, -1.1, 2.0];
        let w = [1.0, 0.5, -0.7];
        let dv = DVector::from_row_slice(&v);
        let dw = DVector::from_row_slice(&w);
        assert!((f.quadratic_form(&v) - dv.dot(&(&inv * &dv))).abs() < 1e-13);
        assert!((f.bilinear_form(&v, &w) - dv.dot(&(&inv * &dw))).abs() < 1e-13);
        let x = f.solve(&v);
        let expected = &inv * &dv;
        for i in 0..3 {
            assert!((x[i] - expected[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn detects_singular_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(!SpectralFactor::new(&a).is_positive_definite());
        let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(!SpectralFactor::new(&z).is_positive_definite());
        let (lo, hi) = eigenvalue_range(&a);
        assert!(lo.abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
    }
}
