//! Discrete Fourier machinery on uniform periodic grids.
//!
//! Conventions: a periodic function sampled at `M` (even) nodes
//! `x_k = x0 + k·h`, period `P = M·h`, is represented by `M+1` exponential
//! coefficients `c_n`, `n ∈ {-M/2, …, M/2}`, with
//! `c_n = (1/M) Σ_k f_k exp(-i κ_n x_k)` and `κ_n = 2πn/P`. The two end
//! modes satisfy `c_{-M/2} = c_{M/2}` on the grid; the inverse transform
//! weights them by 1/2 each. Odd spectral operators (derivative,
//! antiderivative) zero the end modes, which is exact on the grid because
//! `sin(κ_{M/2} x_k) = 0` at the nodes.

use num_complex::Complex64;

fn is_pow2(m: usize) -> bool {
    m != 0 && m & (m - 1) == 0
}

/// In-place iterative radix-2 FFT (unnormalized). `sign` is -1 for the
/// forward transform, +1 for the inverse.
fn fft_pow2(buf: &mut [Complex64], sign: f64) {
    let m = buf.len();
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..m {
        let mut bit = m >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= m {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let wlen = Complex64::from_polar(1.0, ang);
        let mut i = 0;
        while i < m {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[i + k];
                let v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// Unnormalized DFT, `out_j = Σ_k buf_k exp(sign·2πi jk/M)`, direct O(M²)
/// fallback for non-power-of-two lengths.
fn dft_direct(buf: &[Complex64], sign: f64) -> Vec<Complex64> {
    let m = buf.len();
    let base = sign * 2.0 * std::f64::consts::PI / m as f64;
    (0..m)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &v) in buf.iter().enumerate() {
                acc += v * Complex64::from_polar(1.0, base * ((j * k) % m) as f64);
            }
            acc
        })
        .collect()
}

fn transform(values: &[Complex64], sign: f64) -> Vec<Complex64> {
    if is_pow2(values.len()) {
        let mut buf = values.to_vec();
        fft_pow2(&mut buf, sign);
        buf
    } else {
        dft_direct(values, sign)
    }
}

/// Forward transform of `M` samples starting at `x0` with spacing `h`.
/// Returns `M+1` coefficients indexed by `n + M/2` for `n ∈ {-M/2,…,M/2}`.
pub fn forward(values: &[Complex64], x0: f64, h: f64) -> Vec<Complex64> {
    let m = values.len();
    assert!(m >= 2 && m % 2 == 0, "need an even number of samples");
    let half = m / 2;
    let period = m as f64 * h;
    let std = transform(values, -1.0);
    let scale = 1.0 / m as f64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
    for n in -(half as i64)..=(half as i64) {
        let idx = n.rem_euclid(m as i64) as usize;
        let kappa = 2.0 * std::f64::consts::PI * n as f64 / period;
        let phase = Complex64::from_polar(1.0, -kappa * x0);
        coeffs[(n + half as i64) as usize] = std[idx] * scale * phase;
    }
    coeffs
}

/// Inverse of [`forward`]: `M+1` coefficients back to `M` samples, the two
/// end modes half-weighted.
pub fn inverse(coeffs: &[Complex64], x0: f64, h: f64) -> Vec<Complex64> {
    let m = coeffs.len() - 1;
    assert!(m >= 2 && m % 2 == 0, "need 2·half+1 coefficients");
    let half = m / 2;
    let period = m as f64 * h;
    let mut std = vec![Complex64::new(0.0, 0.0); m];
    for n in -(half as i64)..=(half as i64) {
        let w = if n.unsigned_abs() as usize == half {
            0.5
        } else {
            1.0
        };
        let kappa = 2.0 * std::f64::consts::PI * n as f64 / period;
        let phase = Complex64::from_polar(1.0, kappa * x0);
        let idx = n.rem_euclid(m as i64) as usize;
        std[idx] += coeffs[(n + half as i64) as usize] * w * phase;
    }
    transform(&std, 1.0)
}

pub fn forward_real(values: &[f64], x0: f64, h: f64) -> Vec<Complex64> {
    let lifted: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&lifted, x0, h)
}

pub fn inverse_real(coeffs: &[Complex64], x0: f64, h: f64) -> Vec<f64> {
    inverse(coeffs, x0, h).iter().map(|c| c.re).collect()
}

/// Multiply coefficients by `i κ_n` in place (spectral derivative), zeroing
/// the end modes.
pub fn derivative_coeffs(coeffs: &mut [Complex64], h: f64) {
    let m = coeffs.len() - 1;
    let half = (m / 2) as i64;
    let period = m as f64 * h;
    for n in -half..=half {
        let idx = (n + half) as usize;
        if n.abs() == half {
            coeffs[idx] = Complex64::new(0.0, 0.0);
        } else {
            let kappa = 2.0 * std::f64::consts::PI * n as f64 / period;
            coeffs[idx] *= Complex64::new(0.0, kappa);
        }
    }
}

/// Replace coefficients by those of the zero-mean antiderivative
/// `Π₀ ∂x⁻¹ Π₀`: the mean mode and the end modes are zeroed, the rest
/// divided by `i κ_n`.
pub fn antiderivative_coeffs(coeffs: &mut [Complex64], h: f64) {
    let m = coeffs.len() - 1;
    let half = (m / 2) as i64;
    let period = m as f64 * h;
    for n in -half..=half {
        let idx = (n + half) as usize;
        if n == 0 || n.abs() == half {
            coeffs[idx] = Complex64::new(0.0, 0.0);
        } else {
            let kappa = 2.0 * std::f64::consts::PI * n as f64 / period;
            coeffs[idx] /= Complex64::new(0.0, kappa);
        }
    }
}

/// Spectral derivative of complex samples.
pub fn derivative_samples(values: &[Complex64], x0: f64, h: f64) -> Vec<Complex64> {
    let mut c = forward(values, x0, h);
    derivative_coeffs(&mut c, h);
    inverse(&c, x0, h)
}

/// `Π₀ ∂x⁻¹ Π₀` applied to complex samples.
pub fn antiderivative_samples(values: &[Complex64], x0: f64, h: f64) -> Vec<Complex64> {
    let mut c = forward(values, x0, h);
    antiderivative_coeffs(&mut c, h);
    inverse(&c, x0, h)
}
