//! Symmetric eigendecomposition: Householder tridiagonalization (tred2)
//! followed by the implicit-shift QL iteration (tql2). Derived from the
//! Algol procedures of Bowdler, Martin, Reinsch and Wilkinson via the
//! public-domain Jama translation.

use super::{EigenError, Mat};

/// Iterations allowed per eigenvalue in the QL sweep.
const MAX_QL_ITER: usize = 60;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns of the
/// returned matrix) of a symmetric matrix. Symmetry is the caller's
/// responsibility; only the lower triangle consistency matters up to
/// rounding since the input is copied as-is.
pub fn symmetric_eigen(a: &Mat) -> Result<(Vec<f64>, Mat), EigenError> {
    let n = a.size();
    let mut v = a.clone();
    let mut d = vec![0.0_f64; n];
    let mut e = vec![0.0_f64; n];
    if n == 0 {
        return Ok((d, v));
    }
    if n == 1 {
        d[0] = v[(0, 0)];
        v[(0, 0)] = 1.0;
        return Ok((d, v));
    }
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    Ok((d, v))
}

fn tred2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    // Householder reduction to tridiagonal form.
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<(), EigenError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }

        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(EigenError::NoConvergence {
                        iterations: iter,
                        index: l,
                    });
                }
                // Implicit shift.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                // Implicit QL sweep.
                p = d[m];
                let mut c = 1.0_f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0_f64;
                let mut s2 = 0.0_f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    sort_ascending(v, d);
    Ok(())
}

fn sort_ascending(v: &mut Mat, d: &mut [f64]) {
    let n = d.len();
    // Ascending sort, carrying eigenvectors along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                let tmp = v[(j, i)];
                v[(j, i)] = v[(j, k)];
                v[(j, k)] = tmp;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let mut m = Mat::zeros(4);
        for (i, &x) in [3.0, -1.0, 2.0, 0.5].iter().enumerate() {
            m[(i, i)] = x;
        }
        let (d, _) = symmetric_eigen(&m).unwrap();
        assert_eq!(d, vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn residuals_and_orthogonality_on_random_symmetric() {
        let n = 40;
        let mut rng = crate::util::SplitMix64::new(99);
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let x = rng.next_symmetric();
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        let (d, v) = symmetric_eigen(&m).unwrap();
        for k in 0..n {
            let col = v.column(k);
            let mv = m.mul_vec(&col);
            let mut resid = 0.0_f64;
            let mut norm = 0.0_f64;
            for i in 0..n {
                resid += (mv[i] - d[k] * col[i]).powi(2);
                norm += col[i] * col[i];
            }
            assert!(resid.sqrt() < 1e-10, "eigenpair {k} residual");
            assert!((norm - 1.0).abs() < 1e-10, "eigenvector {k} norm");
        }
        for k in 1..n {
            assert!(d[k] >= d[k - 1], "eigenvalues must ascend");
        }
    }

    #[test]
    fn circulant_second_difference_closed_form() {
        // Periodic -d²/dx² stencil: eigenvalues (2 - 2 cos(2πk/n)) / h².
        let n = 64;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 2.0 / (h * h);
            m[(i, (i + 1) % n)] = -1.0 / (h * h);
            m[(i, (i + n - 1) % n)] = -1.0 / (h * h);
        }
        let (d, _) = symmetric_eigen(&m).unwrap();
        let mut expect: Vec<f64> = (0..n)
            .map(|k| (2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()) / (h * h))
            .collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in d.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}
