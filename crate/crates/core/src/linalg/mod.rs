//! Dense linear algebra: just enough for full eigendecompositions of the
//! operator matrices (dimensions up to ~1200) and complex resolvent solves.
//!
//! The eigensolvers are ports of the classic EISPACK/Jama routines
//! (Householder tridiagonalization + implicit QL for symmetric matrices,
//! orthogonal Hessenberg reduction + real Schur QR with eigenvector
//! back-substitution for general real matrices).

mod complex;
mod general;
mod symmetric;

pub use complex::{CLu, CMat, SolveError};
pub use general::general_eigen;
pub use symmetric::symmetric_eigen;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("QR iteration failed to converge after {iterations} iterations (index {index})")]
    NoConvergence { iterations: usize, index: usize },
}

/// Square dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest |a_ij - a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues and right eigenvectors of a real square matrix. Complex
/// conjugate pairs appear adjacently, positive imaginary part first.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// `vectors[k]` is the eigenvector belonging to `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat_mul_vec() {
        let m = Mat::from_fn(3, |i, j| (i * 3 + j) as f64);
        let v = m.mul_vec(&[1.0, 0.0, -1.0]);
        assert_eq!(v, vec![-2.0, -2.0, -2.0]);
    }

    #[test]
    fn asymmetry_of_symmetric_matrix_is_zero() {
        let m = Mat::from_fn(4, |i, j| ((i + j) as f64).sin());
        assert_eq!(m.asymmetry(), 0.0);
    }
}
