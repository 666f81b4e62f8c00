//! Complex dense matrix and LU solver for the resolvent probes.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is singular to working precision at pivot {0}")]
    Singular(usize),
}

/// Square dense complex matrix, row-major.
#[derive(Debug, Clone)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<CLu, SolveError> {
        let n = self.n;
        let mut lu = self.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pivot = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let mag = lu[(i, k)].norm();
                if mag > best {
                    best = mag;
                    pivot = i;
                }
            }
            if best == 0.0 {
                return Err(SolveError::Singular(k));
            }
            if pivot != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                }
                piv.swap(k, pivot);
            }
            let diag = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / diag;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        Ok(CLu { lu, piv })
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU factors of a [`CMat`].
#[derive(Debug, Clone)]
pub struct CLu {
    lu: CMat,
    piv: Vec<usize>,
}

impl CLu {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.size();
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            x[i] /= self.lu[(i, i)];
            for j in 0..i {
                let sub = self.lu[(j, i)] * x[i];
                x[j] -= sub;
            }
        }
        x
    }

    /// Cheap lower-bound estimate of the 1-norm condition number, from
    /// a handful of deterministic solve probes. Used only to flag
    /// near-singular resolvent systems, not as a certified bound.
    pub fn condition_estimate(&self, matrix_one_norm: f64) -> f64 {
        let n = self.lu.size();
        let mut inv_norm: f64 = 0.0;
        let mut rng = crate::util::SplitMix64::new(0xc0de);
        for probe in 0..4 {
            let b: Vec<Complex64> = (0..n)
                .map(|i| {
                    let s = match probe {
                        0 => 1.0,
                        1 => {
                            if i % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                        _ => {
                            if rng.next_f64() < 0.5 {
                                -1.0
                            } else {
                                1.0
                            }
                        }
                    };
                    Complex64::new(s, 0.0)
                })
                .collect();
            let x = self.solve(&b);
            let xnorm: f64 = x.iter().map(|c| c.norm()).sum();
            let bnorm: f64 = b.iter().map(|c| c.norm()).sum();
            inv_norm = inv_norm.max(xnorm / bnorm);
        }
        matrix_one_norm * inv_norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_known_solution() {
        let n = 25;
        let mut rng = crate::util::SplitMix64::new(77);
        let a = CMat::from_fn(n, |i, j| {
            let diag = if i == j { 4.0 } else { 0.0 };
            Complex64::new(rng.next_symmetric() + diag, rng.next_symmetric())
        });
        let x_true: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(i as f64 * 0.1 - 1.0, (i as f64 * 0.3).sin()))
            .collect();
        let b = a.mul_vec(&x_true);
        let lu = a.lu().unwrap();
        let x = lu.solve(&b);
        for (xa, xb) in x.iter().zip(&x_true) {
            assert!((xa - xb).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        let a = CMat::zeros(3);
        assert!(matches!(a.lu(), Err(SolveError::Singular(_))));
    }

    #[test]
    fn condition_estimate_is_large_for_nearly_singular() {
        let n = 8;
        let mut a = CMat::from_fn(n, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        a[(n - 1, n - 1)] = Complex64::new(1e-13, 0.0);
        let lu = a.lu().unwrap();
        let cond = lu.condition_estimate(a.one_norm());
        assert!(cond > 1e12, "cond estimate {cond}");
    }
}
