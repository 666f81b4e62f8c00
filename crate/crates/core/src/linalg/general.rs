//! General real eigendecomposition: orthogonal reduction to Hessenberg
//! form (orthes) followed by the real Schur QR iteration with eigenvector
//! back-substitution (hqr2). Ported from the EISPACK/Jama routines; loop
//! control uses signed indices to keep the original countdown structure.

use super::{EigenDecomposition, EigenError, Mat};
use num_complex::Complex64;

/// Eigenvalues and right eigenvectors of a general real matrix.
/// Results are sorted by (Re, Im) ascending; complex eigenvalues come in
/// conjugate pairs.
pub fn general_eigen(a: &Mat) -> Result<EigenDecomposition, EigenError> {
    let nn = a.size();
    if nn == 0 {
        return Ok(EigenDecomposition {
            values: vec![],
            vectors: vec![],
        });
    }
    if nn == 1 {
        return Ok(EigenDecomposition {
            values: vec![Complex64::new(a[(0, 0)], 0.0)],
            vectors: vec![vec![Complex64::new(1.0, 0.0)]],
        });
    }

    let mut h = a.clone();
    let mut v = Mat::identity(nn);
    let mut d = vec![0.0_f64; nn];
    let mut e = vec![0.0_f64; nn];

    orthes(&mut h, &mut v);
    hqr2(&mut h, &mut v, &mut d, &mut e)?;

    // Assemble complex pairs: e[k] > 0 marks the first column of a pair,
    // whose eigenvector is V[:,k] + i V[:,k+1].
    let mut values: Vec<Complex64> = Vec::with_capacity(nn);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(nn);
    let mut k = 0usize;
    while k < nn {
        if e[k] == 0.0 {
            values.push(Complex64::new(d[k], 0.0));
            vectors.push((0..nn).map(|i| Complex64::new(v[(i, k)], 0.0)).collect());
            k += 1;
        } else {
            let re: Vec<f64> = (0..nn).map(|i| v[(i, k)]).collect();
            let im: Vec<f64> = (0..nn).map(|i| v[(i, k + 1)]).collect();
            values.push(Complex64::new(d[k], e[k]));
            vectors.push(
                re.iter()
                    .zip(&im)
                    .map(|(&r, &i)| Complex64::new(r, i))
                    .collect(),
            );
            values.push(Complex64::new(d[k + 1], e[k + 1]));
            vectors.push(
                re.iter()
                    .zip(&im)
                    .map(|(&r, &i)| Complex64::new(r, -i))
                    .collect(),
            );
            k += 2;
        }
    }

    let mut order: Vec<usize> = (0..nn).collect();
    order.sort_by(|&p, &q| {
        values[p]
            .re
            .total_cmp(&values[q].re)
            .then(values[p].im.total_cmp(&values[q].im))
    });
    Ok(EigenDecomposition {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
    })
}

fn orthes(h: &mut Mat, v: &mut Mat) {
    let nn = h.size();
    let low = 0usize;
    let high = nn - 1;
    let mut ort = vec![0.0_f64; nn];

    for m in (low + 1)..high {
        let mut scale = 0.0;
        for i in m..=high {
            scale += h[(i, m - 1)].abs();
        }
        if scale != 0.0 {
            let mut hh = 0.0;
            for i in (m..=high).rev() {
                ort[i] = h[(i, m - 1)] / scale;
                hh += ort[i] * ort[i];
            }
            let mut g = hh.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            hh -= ort[m] * g;
            ort[m] -= g;

            for j in m..nn {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i] * h[(i, j)];
                }
                f /= hh;
                for i in m..=high {
                    h[(i, j)] -= f * ort[i];
                }
            }
            for i in 0..=high {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j] * h[(i, j)];
                }
                f /= hh;
                for j in m..=high {
                    h[(i, j)] -= f * ort[j];
                }
            }
            ort[m] *= scale;
            h[(m, m - 1)] = scale * g;
        }
    }

    for m in ((low + 1)..high).rev() {
        if h[(m, m - 1)] != 0.0 {
            for i in (m + 1)..=high {
                ort[i] = h[(i, m - 1)];
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i] * v[(i, j)];
                }
                // Double division avoids possible underflow.
                g = (g / ort[m]) / h[(m, m - 1)];
                for i in m..=high {
                    v[(i, j)] += g * ort[i];
                }
            }
        }
    }
}

fn cdiv(xr: f64, xi: f64, yr: f64, yi: f64) -> (f64, f64) {
    if yr.abs() > yi.abs() {
        let r = yi / yr;
        let d = yr + r * yi;
        ((xr + r * xi) / d, (xi - r * xr) / d)
    } else {
        let r = yr / yi;
        let d = yi + r * yr;
        ((r * xr + xi) / d, (r * xi - xr) / d)
    }
}

/// Iterations allowed per eigenvalue in the QR sweep.
const MAX_QR_ITER: usize = 120;

#[allow(clippy::too_many_lines)]
fn hqr2(hm: &mut Mat, vm: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<(), EigenError> {
    let nn = hm.size() as i64;
    let mut n = nn - 1;
    let low: i64 = 0;
    let high: i64 = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0_f64;
    let (mut p, mut q, mut r, mut s, mut z) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let (mut t, mut w, mut x, mut y);

    macro_rules! h {
        ($i:expr, $j:expr) => {
            hm[($i as usize, $j as usize)]
        };
    }
    macro_rules! v {
        ($i:expr, $j:expr) => {
            vm[($i as usize, $j as usize)]
        };
    }

    let mut norm = 0.0_f64;
    for i in 0..nn {
        if i < low || i > high {
            d[i as usize] = h![i, i];
            e[i as usize] = 0.0;
        }
        for j in (i - 1).max(0)..nn {
            norm += h![i, j].abs();
        }
    }

    let mut iter = 0;
    while n >= low {
        // Look for a single small sub-diagonal element.
        let mut l = n;
        while l > low {
            s = h![l - 1, l - 1].abs() + h![l, l].abs();
            if s == 0.0 {
                s = norm;
            }
            if h![l, l - 1].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            // One root found.
            h![n, n] += exshift;
            d[n as usize] = h![n, n];
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            // Two roots found.
            w = h![n, n - 1] * h![n - 1, n];
            p = (h![n - 1, n - 1] - h![n, n]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h![n, n] += exshift;
            h![n - 1, n - 1] += exshift;
            x = h![n, n];

            if q >= 0.0 {
                // Real pair.
                z = if p >= 0.0 { p + z } else { p - z };
                d[(n - 1) as usize] = x + z;
                d[n as usize] = d[(n - 1) as usize];
                if z != 0.0 {
                    d[n as usize] = x - w / z;
                }
                e[(n - 1) as usize] = 0.0;
                e[n as usize] = 0.0;
                x = h![n, n - 1];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in (n - 1)..nn {
                    z = h![n - 1, j];
                    h![n - 1, j] = q * z + p * h![n, j];
                    h![n, j] = q * h![n, j] - p * z;
                }
                for i in 0..=n {
                    z = h![i, n - 1];
                    h![i, n - 1] = q * z + p * h![i, n];
                    h![i, n] = q * h![i, n] - p * z;
                }
                for i in low..=high {
                    z = v![i, n - 1];
                    v![i, n - 1] = q * z + p * v![i, n];
                    v![i, n] = q * v![i, n] - p * z;
                }
            } else {
                // Complex pair.
                d[(n - 1) as usize] = x + p;
                d[n as usize] = x + p;
                e[(n - 1) as usize] = z;
                e[n as usize] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // No convergence yet: form a shift.
            x = h![n, n];
            y = 0.0;
            w = 0.0;
            if l < n {
                y = h![n - 1, n - 1];
                w = h![n, n - 1] * h![n - 1, n];
            }

            if iter == 10 {
                exshift += x;
                for i in low..=n {
                    h![i, i] -= x;
                }
                s = h![n, n - 1].abs() + h![n - 1, n - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter > MAX_QR_ITER {
                return Err(EigenError::NoConvergence {
                    iterations: iter,
                    index: n as usize,
                });
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=n {
                        h![i, i] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;

            // Two consecutive small sub-diagonal elements?
            let mut m = n - 2;
            while m >= l {
                z = h![m, m];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h![m + 1, m] + h![m, m + 1];
                q = h![m + 1, m + 1] - z - r - s;
                r = h![m + 2, m + 1];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h![m, m - 1].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h![m - 1, m - 1].abs() + z.abs() + h![m + 1, m + 1].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=n {
                h![i, i - 2] = 0.0;
                if i > m + 2 {
                    h![i, i - 3] = 0.0;
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            for k in m..n {
                let notlast = k != n - 1;
                if k != m {
                    p = h![k, k - 1];
                    q = h![k + 1, k - 1];
                    r = if notlast { h![k + 2, k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h![k, k - 1] = -s * x;
                    } else if l != m {
                        h![k, k - 1] = -h![k, k - 1];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = h![k, j] + q * h![k + 1, j];
                        if notlast {
                            p += r * h![k + 2, j];
                            h![k + 2, j] -= p * z;
                        }
                        h![k, j] -= p * x;
                        h![k + 1, j] -= p * y;
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * h![i, k] + y * h![i, k + 1];
                        if notlast {
                            p += z * h![i, k + 2];
                            h![i, k + 2] -= p * r;
                        }
                        h![i, k] -= p;
                        h![i, k + 1] -= p * q;
                    }
                    for i in low..=high {
                        p = x * v![i, k] + y * v![i, k + 1];
                        if notlast {
                            p += z * v![i, k + 2];
                            v![i, k + 2] -= p * r;
                        }
                        v![i, k] -= p;
                        v![i, k + 1] -= p * q;
                    }
                }
            }
        }
    }

    // Backsubstitute to find the vectors of the upper triangular form.
    if norm == 0.0 {
        return Ok(());
    }
    for n in (0..nn).rev() {
        p = d[n as usize];
        q = e[n as usize];

        if q == 0.0 {
            // Real vector.
            let mut l = n;
            h![n, n] = 1.0;
            for i in (0..n).rev() {
                w = h![i, i] - p;
                r = 0.0;
                for j in l..=n {
                    r += h![i, j] * h![j, n];
                }
                if e[i as usize] < 0.0 {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        h![i, n] = if w != 0.0 { -r / w } else { -r / (eps * norm) };
                    } else {
                        x = h![i, i + 1];
                        y = h![i + 1, i];
                        q = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize];
                        t = (x * s - z * r) / q;
                        h![i, n] = t;
                        h![i + 1, n] = if x.abs() > z.abs() {
                            (-r - w * t) / x
                        } else {
                            (-s - y * t) / z
                        };
                    }
                    t = h![i, n].abs();
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            h![j, n] /= t;
                        }
                    }
                }
            }
        } else if q < 0.0 {
            // Complex vector (second of the pair).
            let mut l = n - 1;
            if h![n, n - 1].abs() > h![n - 1, n].abs() {
                h![n - 1, n - 1] = q / h![n, n - 1];
                h![n - 1, n] = -(h![n, n] - p) / h![n, n - 1];
            } else {
                let (cr, ci) = cdiv(0.0, -h![n - 1, n], h![n - 1, n - 1] - p, q);
                h![n - 1, n - 1] = cr;
                h![n - 1, n] = ci;
            }
            h![n, n - 1] = 0.0;
            h![n, n] = 1.0;
            for i in (0..=(n - 2)).rev() {
                let mut ra = 0.0;
                let mut sa = 0.0;
                for j in l..=n {
                    ra += h![i, j] * h![j, n - 1];
                    sa += h![i, j] * h![j, n];
                }
                w = h![i, i] - p;
                if e[i as usize] < 0.0 {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if e[i as usize] == 0.0 {
                        let (cr, ci) = cdiv(-ra, -sa, w, q);
                        h![i, n - 1] = cr;
                        h![i, n] = ci;
                    } else {
                        x = h![i, i + 1];
                        y = h![i + 1, i];
                        let mut vr = (d[i as usize] - p) * (d[i as usize] - p)
                            + e[i as usize] * e[i as usize]
                            - q * q;
                        let vi = (d[i as usize] - p) * 2.0 * q;
                        if vr == 0.0 && vi == 0.0 {
                            vr = eps
                                * norm
                                * (w.abs() + q.abs() + x.abs() + y.abs() + z.abs());
                        }
                        let (cr, ci) =
                            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h![i, n - 1] = cr;
                        h![i, n] = ci;
                        if x.abs() > z.abs() + q.abs() {
                            h![i + 1, n - 1] = (-ra - w * h![i, n - 1] + q * h![i, n]) / x;
                            h![i + 1, n] = (-sa - w * h![i, n] - q * h![i, n - 1]) / x;
                        } else {
                            let (cr, ci) =
                                cdiv(-r - y * h![i, n - 1], -s - y * h![i, n], z, q);
                            h![i + 1, n - 1] = cr;
                            h![i + 1, n] = ci;
                        }
                    }
                    t = h![i, n - 1].abs().max(h![i, n].abs());
                    if (eps * t) * t > 1.0 {
                        for j in i..=n {
                            h![j, n - 1] /= t;
                            h![j, n] /= t;
                        }
                    }
                }
            }
        }
    }

    // Vectors of isolated roots.
    for i in 0..nn {
        if i < low || i > high {
            for j in i..nn {
                v![i, j] = h![i, j];
            }
        }
    }

    // Back transformation to eigenvectors of the original matrix.
    for j in (low..nn).rev() {
        for i in low..=high {
            z = 0.0;
            for k in low..=j.min(high) {
                z += v![i, k] * h![k, j];
            }
            v![i, j] = z;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &Mat, lam: Complex64, vec: &[Complex64]) -> f64 {
        let n = a.size();
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for i in 0..n {
            let mut av = Complex64::new(0.0, 0.0);
            for j in 0..n {
                av += a[(i, j)] * vec[j];
            }
            num += (av - lam * vec[i]).norm_sqr();
            den += vec[i].norm_sqr();
        }
        (num / den).sqrt()
    }

    #[test]
    fn rotation_block_has_conjugate_pair() {
        // [[0, -1], [1, 0]] has eigenvalues ±i.
        let mut a = Mat::zeros(2);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = 1.0;
        let dec = general_eigen(&a).unwrap();
        assert!((dec.values[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((dec.values[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        for (lam, v) in dec.values.iter().zip(&dec.vectors) {
            assert!(residual(&a, *lam, v) < 1e-12);
        }
    }

    #[test]
    fn random_matrix_eigenpairs_have_small_residuals() {
        let n = 30;
        let mut rng = crate::util::SplitMix64::new(1234);
        let a = Mat::from_fn(n, |_, _| rng.next_symmetric());
        let dec = general_eigen(&a).unwrap();
        assert_eq!(dec.values.len(), n);
        for (lam, v) in dec.values.iter().zip(&dec.vectors) {
            assert!(
                residual(&a, *lam, v) < 1e-9,
                "residual too large for λ = {lam}"
            );
        }
        // Conjugate-pair structure: the multiset of eigenvalues is closed
        // under conjugation.
        for lam in &dec.values {
            if lam.im != 0.0 {
                assert!(dec
                    .values
                    .iter()
                    .any(|mu| (mu - lam.conj()).norm() < 1e-8));
            }
        }
    }

    #[test]
    fn agrees_with_symmetric_path_on_symmetric_input() {
        let n = 16;
        let mut rng = crate::util::SplitMix64::new(5);
        let mut a = Mat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let x = rng.next_symmetric();
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let dec = general_eigen(&a).unwrap();
        let (d, _) = super::super::symmetric_eigen(&a).unwrap();
        for (lam, expect) in dec.values.iter().zip(&d) {
            assert!(lam.im.abs() < 1e-10);
            assert!((lam.re - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn upper_triangular_eigenvalues_are_the_diagonal() {
        let mut a = Mat::zeros(4);
        for i in 0..4 {
            for j in i..4 {
                a[(i, j)] = (i + 2 * j) as f64 + 1.0;
            }
        }
        let dec = general_eigen(&a).unwrap();
        let mut diag: Vec<f64> = (0..4).map(|i| a[(i, i)]).collect();
        diag.sort_by(f64::total_cmp);
        for (lam, d) in dec.values.iter().zip(&diag) {
            assert!((lam.re - d).abs() < 1e-10 && lam.im.abs() < 1e-12);
        }
    }
}
