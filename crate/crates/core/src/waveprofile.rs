//! Smooth and peaked periodic traveling-wave profiles.
//!
//! The traveling-wave ODE `(c²-2η)η'' - (η')² + η = 0` has the first
//! integral `E(η, η') = ½(c²-2η)(η')² + ½η² = ℰ`. For each speed
//! `c ∈ (1, c*)` the 2π-periodic smooth wave is singled out by solving
//! `T(ℰ(c), c) = 2π` for the energy level, where the period function is
//! `T = 4 E(κ) sqrt(c² + 2√(2ℰ))` with modulus `κ² = 4√(2ℰ)/(c²+2√(2ℰ))`.
//! The profile itself is recovered on `[0, π]` by Newton iteration on the
//! integral equation `f(η(x)) = x` and extended by even reflection.
//!
//! At `c = c* = π/(2√2)` the family terminates in the peaked wave
//! `η*(x) = (π² - 4π|x| + 2x²)/16`, whose slope jumps by `-π/2` across the
//! crest.

use crate::fourier;
use crate::specfun::{adaptive_quad, complete_elliptic_e, SpecFunError};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Limiting wave speed `c* = π/(2√2)`.
pub fn c_star() -> f64 {
    PI / (2.0 * std::f64::consts::SQRT_2)
}

/// Energy level of the peaked wave, `ℰ* = π⁴/512 = c*⁴/8`.
pub fn peaked_energy() -> f64 {
    PI.powi(4) / 512.0
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("wave speed must satisfy c > 1, got {0}")]
    SpeedDomain(f64),
    #[error("energy {energy:.6e} outside (0, c⁴/8] = (0, {limit:.6e}]")]
    EnergyDomain { energy: f64, limit: f64 },
    #[error("grid needs at least 8 half-period intervals, got {0}")]
    GridTooCoarse(usize),
    #[error("|η| = {eta:.6e} exceeds the turning value √(2ℰ) = {amplitude:.6e}")]
    EtaDomain { eta: f64, amplitude: f64 },
    #[error(
        "T(ℰ, c) - {target} does not change sign on (0, c⁴/8): \
         endpoints ({lo:.6e}, {hi:.6e})"
    )]
    NoRoot { target: f64, lo: f64, hi: f64 },
    #[error("Newton iteration diverged at node {node} (x = {x:.6e}): residual {residual:.3e} after {iterations} iterations")]
    NewtonDiverged {
        node: usize,
        x: f64,
        residual: f64,
        iterations: usize,
    },
    #[error("derivative underflow at node {node}: f'(η) = {derivative:.3e}")]
    DerivativeUnderflow { node: usize, derivative: f64 },
    #[error(transparent)]
    Quadrature(#[from] SpecFunError),
}

/// Wave speed and first-integral level identifying one traveling wave.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub c: f64,
    pub energy: f64,
}

impl ModelParams {
    pub fn new(c: f64, energy: f64) -> Result<Self, ProfileError> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(ProfileError::SpeedDomain(c));
        }
        let limit = energy_crit(c);
        if !(energy > 0.0) || energy > limit * (1.0 + 1e-12) {
            return Err(ProfileError::EnergyDomain { energy, limit });
        }
        Ok(Self { c, energy })
    }

    /// Turning value `√(2ℰ)`: the wave ranges over `[-√(2ℰ), √(2ℰ)]`.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.energy).sqrt()
    }

    pub fn energy_crit(&self) -> f64 {
        energy_crit(self.c)
    }
}

/// Critical energy `ℰ_c = c⁴/8` separating smooth and cusped profiles.
pub fn energy_crit(c: f64) -> f64 {
    c.powi(4) / 8.0
}

/// Uniform symmetric grid `x_j = j·π/N`, `j ∈ {-N,…,N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n_half: usize,
}

impl Grid {
    pub fn new(n_half: usize) -> Result<Self, ProfileError> {
        if n_half < 8 {
            return Err(ProfileError::GridTooCoarse(n_half));
        }
        Ok(Self { n_half })
    }

    pub fn n_half(&self) -> usize {
        self.n_half
    }

    /// Number of stored nodes, `2N+1`.
    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        PI / self.n_half as f64
    }

    /// Node `x_k = -π + k·h` for `k ∈ {0,…,2N}`; the peak `x = 0` sits at
    /// `k = N`.
    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - self.n_half as f64) * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    pub fn peak_index(&self) -> usize {
        self.n_half
    }

    /// Index of the node at `-x_k` (periodic reflection through the peak).
    pub fn reflect(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            2 * self.n_half - k
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Smooth,
    Peaked,
}

/// Sampled periodic traveling-wave profile with its analytic slope.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    pub params: ModelParams,
    pub grid: Grid,
    /// `η` at the `2N+1` nodes, even by construction.
    pub values: Vec<f64>,
    /// `η'` at the nodes; at the crest of the peaked wave this stores the
    /// mean of the one-sided limits (zero).
    pub slope: Vec<f64>,
    pub kind: WaveKind,
    /// One-sided crest slopes `(η'(0⁻), η'(0⁺))` for the peaked wave.
    pub peak_slopes: Option<(f64, f64)>,
}

impl WaveProfile {
    /// `(η')²` at node `k`. `(η')²` extends continuously through the
    /// crest, so the peak node averages the squared one-sided limits.
    pub fn slope_sq(&self, k: usize) -> f64 {
        if let Some((left, right)) = self.peak_slopes {
            if k == self.grid.peak_index() {
                return 0.5 * (left * left + right * right);
            }
        }
        self.slope[k] * self.slope[k]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::MIN, |m, &v| m.max(v))
    }
}

/// Exponential Fourier coefficients of a grid function, `n ∈ {-N,…,N}`.
#[derive(Debug, Clone)]
pub struct FourierCoeffs {
    pub coeffs: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn n_half(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    /// Coefficient for mode `n`.
    pub fn mode(&self, n: i64) -> Complex64 {
        self.coeffs[(n + self.n_half() as i64) as usize]
    }
}

/// Period of the traveling-wave orbit at level `ℰ`:
/// `T = 4E(κ) sqrt(c² + 2√(2ℰ))`, `κ = sqrt(4√(2ℰ)/(c² + 2√(2ℰ)))`.
pub fn period(energy: f64, c: f64) -> Result<f64, ProfileError> {
    let params = ModelParams::new(c, energy)?;
    let s = params.amplitude();
    let denom = c * c + 2.0 * s;
    let kappa = (4.0 * s / denom).sqrt().min(1.0);
    let e = complete_elliptic_e(kappa)?;
    Ok(4.0 * e * denom.sqrt())
}

/// Energy level `ℰ(c)` at which the orbit period equals `target_period`
/// (2π for the co-periodic family). Brackets the root on a logarithmic
/// scan of `(0, c⁴/8]`, bisects, then polishes with secant steps.
pub fn solve_energy_for_period(c: f64, target_period: f64) -> Result<f64, ProfileError> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(ProfileError::SpeedDomain(c));
    }
    let e_crit = energy_crit(c);
    let g = |energy: f64| period(energy, c).map(|t| t - target_period);

    // 64 logarithmically spaced points over 12 decades up to ℰ_c.
    let scan: Vec<f64> = (0..64)
        .map(|k| e_crit * 10f64.powf(-12.0 * (1.0 - k as f64 / 63.0)))
        .collect();
    let mut bracket = None;
    let mut prev = (scan[0], g(scan[0])?);
    for &e in &scan[1..] {
        let val = g(e)?;
        if prev.1 == 0.0 {
            return Ok(prev.0);
        }
        if prev.1.signum() != val.signum() {
            bracket = Some((prev, (e, val)));
            break;
        }
        prev = (e, val);
    }
    let ((mut lo, mut glo), (hi0, ghi0)) = bracket.ok_or(ProfileError::NoRoot {
        target: target_period,
        lo: g(scan[0])?,
        hi: prev.1,
    })?;
    let (mut hi, mut ghi) = (hi0, ghi0);

    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
        if (hi - lo) < 1e-18 * e_crit {
            break;
        }
    }

    // Secant polish.
    let (mut e0, mut g0, mut e1, mut g1) = (lo, glo, hi, ghi);
    for _ in 0..12 {
        if (g1 - g0).abs() < f64::MIN_POSITIVE {
            break;
        }
        let e2 = e1 - g1 * (e1 - e0) / (g1 - g0);
        if !e2.is_finite() || e2 <= 0.0 || e2 > e_crit {
            break;
        }
        let g2 = g(e2)?;
        e0 = e1;
        g0 = g1;
        e1 = e2;
        g1 = g2;
        if g1.abs() < 1e-13 {
            break;
        }
    }
    Ok(if g1.abs() < g0.abs() { e1 } else { e0 })
}

/// Inverse profile map `f(η) = ∫_{η/√(2ℰ)}^{1} sqrt(c²-2√(2ℰ)u)/sqrt(1-u²) du`:
/// the position `x ∈ [0, T/2]` at which the wave takes the value `η`.
///
/// The `(1-u)^{-1/2}` endpoint singularity is removed exactly by the
/// trigonometric substitution `u = cos φ` (the half-angle form of the
/// sin² endpoint substitution), leaving the bounded analytic integrand
/// `sqrt(c² - 2√(2ℰ) cos φ)` on `[0, arccos(η/√(2ℰ))]`.
pub fn profile_inverse_map(eta: f64, params: &ModelParams) -> Result<f64, ProfileError> {
    let s = params.amplitude();
    if eta.abs() > s * (1.0 + 1e-14) {
        return Err(ProfileError::EtaDomain { eta, amplitude: s });
    }
    let lo = (eta / s).clamp(-1.0, 1.0);
    if lo >= 1.0 {
        return Ok(0.0);
    }
    let c2 = params.c * params.c;
    let phi0 = lo.acos();
    let r = adaptive_quad(|phi| (c2 - 2.0 * s * phi.cos()).sqrt(), 0.0, phi0, 1e-15)?;
    Ok(r.value)
}

/// Derivative of [`profile_inverse_map`] in `η`:
/// `f'(η) = -sqrt((c² - 2η)/(2ℰ - η²))`.
fn inverse_map_derivative(eta: f64, params: &ModelParams) -> f64 {
    let num = params.c * params.c - 2.0 * eta;
    let den = 2.0 * params.energy - eta * eta;
    -(num / den.max(f64::MIN_POSITIVE)).sqrt()
}

const NEWTON_MAX_ITER: usize = 100;

/// Smooth profile on the grid by Newton iteration on `f(η_j) = x_j` for
/// the interior nodes of `[0, π]`, with the boundary nodes pinned to the
/// turning values, then even reflection onto `[-π, π]`.
pub fn newton_profile(
    params: &ModelParams,
    grid: &Grid,
    tol: f64,
) -> Result<WaveProfile, ProfileError> {
    let n = grid.n_half();
    let h = grid.step();
    let s = params.amplitude();

    // η on [0, π], boundary nodes pinned to avoid the f'(η) singularities.
    let mut half = vec![0.0_f64; n + 1];
    half[0] = s;
    half[n] = -s;

    let mut guess = s;
    for j in 1..n {
        let target = j as f64 * h;
        // Continuation from the previously solved node.
        let mut eta = if j == 1 { s * (1.0 - 1e-6) } else { guess };
        let mut bracket_hi = guess; // f is decreasing: η_j < η_{j-1}
        let mut bracket_lo = -s;
        let mut resid = f64::MAX;
        let mut converged = false;
        for it in 0..NEWTON_MAX_ITER {
            let fx = profile_inverse_map(eta, params)? - target;
            resid = fx.abs();
            if resid < tol {
                converged = true;
                break;
            }
            if fx > 0.0 {
                // f(η) > x ⇒ η below the root (f decreasing).
                bracket_lo = bracket_lo.max(eta);
            } else {
                bracket_hi = bracket_hi.min(eta);
            }
            let df = inverse_map_derivative(eta, params);
            if !df.is_finite() || df.abs() < f64::MIN_POSITIVE {
                return Err(ProfileError::DerivativeUnderflow {
                    node: j,
                    derivative: df,
                });
            }
            let mut next = eta - fx / df;
            if !next.is_finite() || next <= bracket_lo || next >= bracket_hi {
                next = 0.5 * (bracket_lo + bracket_hi);
            }
            if next == eta && it > 0 {
                // Stuck at working precision.
                converged = resid < 10.0 * tol.max(1e-15);
                break;
            }
            eta = next;
        }
        if !converged {
            return Err(ProfileError::NewtonDiverged {
                node: j,
                x: target,
                residual: resid,
                iterations: NEWTON_MAX_ITER,
            });
        }
        half[j] = eta;
        guess = eta;
    }

    // Even reflection and the analytic slope from the first integral,
    // with sign -sign(x).
    let len = grid.len();
    let peak = grid.peak_index();
    let mut values = vec![0.0_f64; len];
    let mut slope = vec![0.0_f64; len];
    let c2 = params.c * params.c;
    for (j, &eta) in half.iter().enumerate() {
        let mag = ((2.0 * params.energy - eta * eta).max(0.0) / (c2 - 2.0 * eta)).sqrt();
        values[peak + j] = eta;
        values[peak - j] = eta;
        slope[peak + j] = -mag;
        slope[peak - j] = mag;
    }
    slope[peak] = 0.0;
    slope[0] = 0.0;
    slope[len - 1] = 0.0;

    Ok(WaveProfile {
        params: *params,
        grid: *grid,
        values,
        slope,
        kind: WaveKind::Smooth,
        peak_slopes: None,
    })
}

/// Peaked profile `η*(x) = (π² - 4π|x| + 2x²)/16` on `[-π, π]`,
/// 2π-periodic for general `x`.
pub fn peaked_eta(x: f64) -> f64 {
    let r = wrap_to_pi(x).abs();
    (PI * PI - 4.0 * PI * r + 2.0 * r * r) / 16.0
}

/// Peaked slope `η*'(x) = -(π - |x|)·sign(x)/4` (zero at the crest by the
/// one-sided average; note f64::signum(0.0) is 1, hence the explicit case).
pub fn peaked_slope(x: f64) -> f64 {
    let w = wrap_to_pi(x);
    if w == 0.0 {
        return 0.0;
    }
    -(PI - w.abs()) * w.signum() / 4.0
}

fn wrap_to_pi(x: f64) -> f64 {
    let mut w = (x + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        w = PI;
    }
    w
}

/// The closed-form peaked wave sampled on the grid, `c = c*`, `ℰ = π⁴/512`.
pub fn peaked_profile(grid: &Grid) -> WaveProfile {
    let params = ModelParams {
        c: c_star(),
        energy: peaked_energy(),
    };
    let values: Vec<f64> = (0..grid.len()).map(|k| peaked_eta(grid.node(k))).collect();
    let slope: Vec<f64> = (0..grid.len())
        .map(|k| peaked_slope(grid.node(k)))
        .collect();
    WaveProfile {
        params,
        grid: *grid,
        values,
        slope,
        kind: WaveKind::Peaked,
        peak_slopes: Some((PI / 4.0, -PI / 4.0)),
    }
}

/// Discrete Fourier transform of the `2N` samples (node `x = π` dropped):
/// `η̂_n = (h/2π) Σ_j η_j e^{-inx_j}`, `n ∈ {-N,…,N}`.
pub fn dft(profile_values: &[f64], grid: &Grid) -> FourierCoeffs {
    assert!(profile_values.len() >= 2 * grid.n_half());
    let coeffs = fourier::forward_real(&profile_values[..2 * grid.n_half()], -PI, grid.step());
    FourierCoeffs { coeffs }
}

/// Inverse of [`dft`], returning the `2N` samples.
pub fn inverse_dft(coeffs: &FourierCoeffs, grid: &Grid) -> Vec<f64> {
    fourier::inverse_real(&coeffs.coeffs, -PI, grid.step())
}

/// Max-node residual of the first integral and the trapezoidal residual of
/// the zero-mean constraint `∮ [η + (η')²] dx = 0`.
pub fn check_residuals(profile: &WaveProfile) -> (f64, f64) {
    let grid = &profile.grid;
    let c2 = profile.params.c * profile.params.c;
    let energy = profile.params.energy;

    let mut first_integral: f64 = 0.0;
    for k in 0..grid.len() {
        let eta = profile.values[k];
        let e = 0.5 * (c2 - 2.0 * eta) * profile.slope_sq(k) + 0.5 * eta * eta - energy;
        first_integral = first_integral.max(e.abs());
    }

    let h = grid.step();
    let mut zero_mean = 0.0;
    for k in 0..2 * grid.n_half() {
        zero_mean += profile.values[k] + profile.slope_sq(k);
    }
    (first_integral, (h * zero_mean).abs())
}

/// One row of an amplitude sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub c: f64,
    pub energy: f64,
    pub amplitude: f64,
    pub error: Option<String>,
}

/// Wave amplitude versus speed over `c_values`, with the peaked endpoint
/// `(c*, π⁴/512, π²/16)` appended. Per-row failures are recorded without
/// aborting the sweep.
pub fn amplitude_sweep(c_values: &[f64]) -> Vec<SweepRow> {
    let mut rows: Vec<SweepRow> = c_values
        .iter()
        .map(|&c| match solve_energy_for_period(c, 2.0 * PI) {
            Ok(energy) => SweepRow {
                c,
                energy,
                amplitude: (2.0 * energy).sqrt(),
                error: None,
            },
            Err(e) => SweepRow {
                c,
                energy: f64::NAN,
                amplitude: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect();
    rows.push(SweepRow {
        c: c_star(),
        energy: peaked_energy(),
        amplitude: PI * PI / 16.0,
        error: None,
    });
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_energy_and_cstar_are_consistent() {
        // ℰ_c(c*) = c*⁴/8 = π⁴/512.
        assert!((energy_crit(c_star()) - peaked_energy()).abs() < 1e-16);
        assert!((c_star() - 1.1107207345395915).abs() < 1e-15);
    }

    #[test]
    fn period_closed_form_anchors() {
        // κ → 0: T → 2πc.
        for &c in &[1.02, 1.05, 1.1] {
            let t = period(1e-20, c).unwrap();
            assert!((t - 2.0 * PI * c).abs() < 1e-8, "c = {c}: T = {t}");
        }
        // κ = 1 (ℰ = c⁴/8): T = 4c√2 exactly.
        for &c in &[1.02, 1.05, c_star()] {
            let t = period(energy_crit(c), c).unwrap();
            assert!(
                (t - 4.0 * c * std::f64::consts::SQRT_2).abs() < 1e-12,
                "c = {c}"
            );
        }
        // At the peaked endpoint the critical orbit is 2π-periodic.
        let t = period(peaked_energy(), c_star()).unwrap();
        assert!((t - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn period_domain_errors() {
        assert!(period(-1.0, 1.05).is_err());
        assert!(period(0.0, 1.05).is_err());
        assert!(period(energy_crit(1.05) * 1.01, 1.05).is_err());
        assert!(period(0.1, 0.9).is_err());
    }

    #[test]
    fn energy_root_degenerates_at_small_speeds() {
        let e = solve_energy_for_period(1.0005, 2.0 * PI).unwrap();
        assert!(e > 0.0 && e < 2e-3, "ℰ(1.0005) = {e}");
    }

    #[test]
    fn energy_root_approaches_peaked_level_near_cstar() {
        let e = solve_energy_for_period(c_star() * (1.0 - 1e-10), 2.0 * PI).unwrap();
        assert!(
            (e - peaked_energy()).abs() < 1e-5,
            "ℰ near c*: {e} vs {}",
            peaked_energy()
        );
    }

    #[test]
    fn energy_root_agrees_with_dense_scan_oracle() {
        // Independent oracle: locate the sign change of T - 2π on a dense
        // linear energy scan, then bisect with no secant step.
        let c = 1.07;
        let e_crit = energy_crit(c);
        let g = |e: f64| period(e, c).unwrap() - 2.0 * PI;
        let m = 20_000;
        let mut oracle = None;
        let mut prev = (e_crit * 1e-8, g(e_crit * 1e-8));
        for k in 1..=m {
            let e = e_crit * (1e-8 + (1.0 - 2e-8) * k as f64 / m as f64);
            let v = g(e);
            if prev.1.signum() != v.signum() {
                let (mut lo, mut hi) = (prev.0, e);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid).signum() == g(lo).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                oracle = Some(0.5 * (lo + hi));
                break;
            }
            prev = (e, v);
        }
        let oracle = oracle.expect("oracle found a bracket");
        let fast = solve_energy_for_period(c, 2.0 * PI).unwrap();
        assert!(
            (fast - oracle).abs() < 1e-10,
            "solver {fast} vs scan oracle {oracle}"
        );
        assert!((period(fast, c).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn inverse_map_boundary_values() {
        let c = 1.05;
        let energy = solve_energy_for_period(c, 2.0 * PI).unwrap();
        let params = ModelParams::new(c, energy).unwrap();
        let s = params.amplitude();
        assert_eq!(profile_inverse_map(s, &params).unwrap(), 0.0);
        // f(-√(2ℰ)) is the half-period π when ℰ solves the period condition.
        let half = profile_inverse_map(-s, &params).unwrap();
        assert!((half - PI).abs() < 1e-11, "half period {half}");
        // Strict monotonicity between the endpoints.
        let mid = profile_inverse_map(0.0, &params).unwrap();
        assert!(0.0 < mid && mid < half);
        assert!(profile_inverse_map(2.0 * s, &params).is_err());
    }

    #[test]
    fn newton_profile_satisfies_its_defining_equation() {
        let c = 1.03;
        let grid = Grid::new(100).unwrap();
        let energy = solve_energy_for_period(c, 2.0 * PI).unwrap();
        let params = ModelParams::new(c, energy).unwrap();
        let profile = newton_profile(&params, &grid, 1e-14).unwrap();

        let peak = grid.peak_index();
        // Boundary pinning.
        assert_eq!(profile.values[peak], params.amplitude());
        assert_eq!(profile.values[grid.len() - 1], -params.amplitude());
        // Interior: |f(η_j) - x_j| < 1e-13.
        for j in 1..grid.n_half() {
            let x = j as f64 * grid.step();
            let fx = profile_inverse_map(profile.values[peak + j], &params).unwrap();
            assert!((fx - x).abs() < 1e-13, "node {j}: {}", (fx - x).abs());
        }
        // Single even hump, strictly decreasing on (0, π), below c²/2.
        for j in 1..=grid.n_half() {
            assert!(profile.values[peak + j] < profile.values[peak + j - 1]);
            assert_eq!(profile.values[peak + j], profile.values[peak - j]);
        }
        assert!(profile.max_value() < c * c / 2.0);
        // First-integral residual at machine precision by construction.
        let (fi, zm) = check_residuals(&profile);
        assert!(fi < 1e-12, "first integral residual {fi}");
        assert!(zm < 1e-3, "zero-mean residual {zm}");
    }

    #[test]
    fn peaked_profile_closed_form_values() {
        let grid = Grid::new(64).unwrap();
        let p = peaked_profile(&grid);
        let peak = grid.peak_index();
        assert!((p.values[peak] - PI * PI / 16.0).abs() < 1e-15);
        assert!((p.values[peak] - c_star() * c_star() / 2.0).abs() < 1e-15);
        assert!((p.values[0] + PI * PI / 16.0).abs() < 1e-15);
        assert!((p.values[grid.len() - 1] + PI * PI / 16.0).abs() < 1e-15);
        // Slope jump -π/2 across the crest.
        let (left, right) = p.peak_slopes.unwrap();
        assert!((right - left + PI / 2.0).abs() < 1e-15);
        // First integral holds off the crest (and on it, via the squared
        // average, since the degenerate coefficient vanishes there).
        let (fi, _) = check_residuals(&p);
        assert!(fi < 1e-12, "peaked first-integral residual {fi}");
    }

    #[test]
    fn peaked_zero_mean_residual_is_second_order() {
        let grids = [100, 200, 400];
        let mut resid = Vec::new();
        for &n in &grids {
            let p = peaked_profile(&Grid::new(n).unwrap());
            resid.push(check_residuals(&p).1);
        }
        for w in resid.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                ratio > 3.0 && ratio < 5.0,
                "O(h²) convergence expected, residuals {resid:?}"
            );
        }
    }

    #[test]
    fn dft_trivial_inputs() {
        let grid = Grid::new(32).unwrap();
        let ones = vec![1.0; grid.len()];
        let c = dft(&ones, &grid);
        assert!((c.mode(0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(c.mode(5).norm() < 1e-14);

        let cos3: Vec<f64> = grid.nodes().iter().map(|x| (3.0 * x).cos()).collect();
        let c = dft(&cos3, &grid);
        assert!((c.mode(3) - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!((c.mode(-3) - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!(c.mode(2).norm() < 1e-13);
    }

    #[test]
    fn dft_of_peaked_profile_matches_exact_closed_form() {
        // The grid transform of the piecewise quadratic has an exact closed
        // form: summing the series coefficients 1/(4j²) over each alias
        // class j ≡ m (mod 2N) gives η̂_m = (π/2N)²/(4 sin²(πm/2N)), and
        // η̂₀ = -π²/48 + π²/(48N²).
        let n = 300;
        let grid = Grid::new(n).unwrap();
        let p = peaked_profile(&grid);
        let c = dft(&p.values, &grid);
        let m2 = (2 * n) as f64;
        let expected0 = -PI * PI / 48.0 + PI * PI / (48.0 * (n * n) as f64);
        assert!(
            (c.mode(0).re - expected0).abs() < 1e-13,
            "η̂₀ = {} vs {}",
            c.mode(0).re,
            expected0
        );
        assert!(c.mode(0).im.abs() < 1e-15);
        for m in 1..=50_i64 {
            let theta = PI * m as f64 / m2;
            let exact = (PI / m2).powi(2) / (4.0 * theta.sin().powi(2));
            assert!(
                (c.mode(m).re - exact).abs() < 1e-14,
                "mode {m}: {} vs exact DFT {exact}",
                c.mode(m).re
            );
            assert!(c.mode(m).im.abs() < 1e-14);
        }
        // O(m⁻²) decay law 4m²η̂_m ≈ 1; the exact deviation is
        // (θ/sin θ)² - 1 with θ = πm/2N, which stays within 2% through
        // m = 46 at N = 300 and reaches ≈ 0.0233 at m = 50.
        for m in 1..=46 {
            let v = 4.0 * (m * m) as f64 * c.mode(m).re;
            assert!((v - 1.0).abs() <= 0.02, "mode {m}: 4m²η̂ = {v}");
        }
    }

    #[test]
    fn dft_inverse_roundtrip_on_newton_profile() {
        let c = 1.05;
        let grid = Grid::new(64).unwrap();
        let energy = solve_energy_for_period(c, 2.0 * PI).unwrap();
        let params = ModelParams::new(c, energy).unwrap();
        let p = newton_profile(&params, &grid, 1e-14).unwrap();
        let coeffs = dft(&p.values, &grid);
        let back = inverse_dft(&coeffs, &grid);
        for (a, b) in p.values.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitude_sweep_is_monotone_with_peaked_endpoint() {
        let rows = amplitude_sweep(&[1.01, 1.03, 1.05, 1.07, 1.09]);
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2) {
            assert!(w[1].amplitude > w[0].amplitude, "amplitude must grow in c");
        }
        let last = rows.last().unwrap();
        assert!((last.amplitude - PI * PI / 16.0).abs() < 1e-15);
        assert!((last.c - 1.1107).abs() < 1e-4);
        // period(ℰ(c), c) = 2π for every swept speed.
        for row in &rows[..5] {
            let t = period(row.energy, row.c).unwrap();
            assert!((t - 2.0 * PI).abs() < 1e-12, "c = {}", row.c);
        }
    }
}
