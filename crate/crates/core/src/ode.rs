//! Adaptive Dormand-Prince 5(4) integration over complex state vectors,
//! plus the classical fixed-step RK4 used by the characteristic solver.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at x = {x:.6e} (h = {h:.3e})")]
    StepUnderflow { x: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at x = {x:.6e}")]
    TooManySteps { max_steps: usize, x: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// Accepted nodes and states of an adaptive integration.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub xs: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

// Dormand-Prince tableau.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = rhs(x, y)` from `x0` to `x_end` (forward), recording
/// every accepted step.
pub fn integrate(
    rhs: impl Fn(f64, &[Complex64]) -> Vec<Complex64>,
    x0: f64,
    x_end: f64,
    y0: Vec<Complex64>,
    opts: &OdeOptions,
) -> Result<OdeSolution, OdeError> {
    assert!(x_end > x0);
    let span = x_end - x0;
    let dim = y0.len();
    let mut x = x0;
    let mut y = y0;
    let mut h = (span * 1e-6).min(opts.h_max);
    let mut xs = vec![x0];
    let mut states = vec![y.clone()];
    let mut k1 = rhs(x, &y);

    for _step in 0..opts.max_steps {
        if x >= x_end - 1e-12 * span {
            return Ok(OdeSolution { xs, states });
        }
        // Underflow concerns the controller's step, not the final stub
        // capped by the remaining distance.
        if h < 1e-13 * span {
            return Err(OdeError::StepUnderflow { x, h });
        }
        h = h.min(x_end - x).min(opts.h_max);

        let mut k = vec![k1.clone()];
        for stage in 0..6 {
            let mut arg = y.clone();
            for (s, ks) in k.iter().enumerate() {
                let a = A[stage][s];
                if a != 0.0 {
                    for (ai, ki) in arg.iter_mut().zip(ks) {
                        *ai += h * a * ki;
                    }
                }
            }
            k.push(rhs(x + C[stage] * h, &arg));
        }

        let mut y5 = y.clone();
        let mut err = vec![Complex64::new(0.0, 0.0); dim];
        for (s, ks) in k.iter().enumerate() {
            for i in 0..dim {
                y5[i] += h * B5[s] * ks[i];
                err[i] += h * (B5[s] - B4[s]) * ks[i];
            }
        }

        let mut err_norm = 0.0_f64;
        for i in 0..dim {
            let scale = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            err_norm += (err[i].norm() / scale).powi(2);
        }
        err_norm = (err_norm / dim as f64).sqrt();

        if err_norm <= 1.0 {
            x += h;
            y = y5;
            // FSAL: the 7th stage is the first stage of the next step.
            k1 = k.pop().unwrap();
            xs.push(x);
            states.push(y.clone());
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Err(OdeError::TooManySteps {
        max_steps: opts.max_steps,
        x,
    })
}

/// One classical RK4 step for real state vectors.
pub fn rk4_step(rhs: impl Fn(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], dt: f64) -> Vec<f64> {
    let k1 = rhs(t, y);
    let mid1: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect();
    let k2 = rhs(t + 0.5 * dt, &mid1);
    let mid2: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect();
    let k3 = rhs(t + 0.5 * dt, &mid2);
    let end: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + dt * b).collect();
    let k4 = rhs(t + dt, &end);
    y.iter()
        .enumerate()
        .map(|(i, a)| a + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_is_exact_to_tolerance() {
        let lam = Complex64::new(0.3, 1.1);
        let sol = integrate(
            |_, y| vec![lam * y[0]],
            0.0,
            2.0,
            vec![Complex64::new(1.0, 0.0)],
            &OdeOptions::default(),
        )
        .unwrap();
        let last = sol.states.last().unwrap()[0];
        let exact = (lam * 2.0).exp();
        assert!((last - exact).norm() < 1e-10, "{last} vs {exact}");
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let sol = integrate(
            |_, y| vec![y[1], -y[0]],
            0.0,
            20.0,
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            &OdeOptions::default(),
        )
        .unwrap();
        for s in &sol.states {
            let e = s[0].norm_sqr() + s[1].norm_sqr();
            assert!((e - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_state_matches_integral() {
        // y' = cos(x) integrated as a state alongside nothing else.
        let sol = integrate(
            |x, _| vec![Complex64::new(x.cos(), 0.0)],
            0.0,
            3.0,
            vec![Complex64::new(0.0, 0.0)],
            &OdeOptions::default(),
        )
        .unwrap();
        let last = sol.states.last().unwrap()[0];
        assert!((last.re - 3.0_f64.sin()).abs() < 1e-11);
    }

    #[test]
    fn rk4_is_fourth_order() {
        // One step of y' = y from 1: error ~ dt⁵/120.
        let mut errs = Vec::new();
        for &dt in &[0.1, 0.05] {
            let y = rk4_step(|_, y| vec![y[0]], 0.0, &[1.0], dt);
            errs.push((y[0] - dt.exp()).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 25.0 && ratio < 40.0, "per-step order 5: {errs:?}");
    }

    #[test]
    fn max_step_limits_node_spacing() {
        let sol = integrate(
            |_, y| vec![y[0] * 0.0],
            0.0,
            1.0,
            vec![Complex64::new(1.0, 0.0)],
            &OdeOptions {
                h_max: 0.01,
                ..OdeOptions::default()
            },
        )
        .unwrap();
        for w in sol.xs.windows(2) {
            assert!(w[1] - w[0] <= 0.01 + 1e-12);
        }
    }
}
