//! Nonlinear evolution of peaked-wave perturbations by the method of
//! characteristics.
//!
//! Labels `s ∈ (0, 2π)` parametrize characteristic curves `X(t, s)`
//! between two consecutive peaks; the peak itself is the fixed
//! characteristic `X ≡ 0 (≡ 2π)` carrying its own value `Z₀(t)`. Along
//! the curves the perturbation value `Z = ζ(t, X)` and slope
//! `V = ∂x ζ(t, X)` satisfy
//!
//! * `2c* Ẋ = -(c*² - 2η*(X)) + 2(Z - Z₀)`
//! * `2c* Ż = -(1/π) ∮ η*' ζ dx + ½ Π₀∂x⁻¹Π₀ (ζ + 2(∂x ζ)²) |_X`
//! * `2c* V̇ = -2η*'(X) V - V² + ½(Z + Z₀)`
//! * `2c* Ż₀ = (2/π) ∮ η*' (∂x ζ)² dx`
//!
//! Two discretization choices make the conserved pair `∮ζ dx` and
//! `Z₀ + (1/π)∮(∂xζ)² dx` exact in the semi-discrete system (so the
//! recorded drift measures the RK4 time error alone): the mean term
//! `∮ η*' ζ dx` is evaluated as the Stieltjes sum `Σ Δη*(X) · Z̄` (which
//! telescopes against the transport of the trapezoid mass), and `Ż₀` is
//! evaluated as `-(1/π) d/dt[trapz(V²)]` expanded through the known
//! `Ẋ, V̇` — the form the conservation law itself dictates.

use crate::ode::rk4_step;
use crate::waveprofile::WaveProfile;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CharEvalError {
    #[error("positions are not strictly increasing at index {index}: {left} ≥ {right} (characteristic crossing)")]
    NonMonotone {
        index: usize,
        left: f64,
        right: f64,
    },
    #[error("need at least 16 labels, got {0}")]
    TooFewLabels(usize),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
}

fn c_star() -> f64 {
    PI / (2.0 * std::f64::consts::SQRT_2)
}

/// `η*` in the between-peaks coordinate `x ∈ [0, 2π]`.
fn eta_star_between(x: f64) -> f64 {
    let r = x.min(2.0 * PI - x);
    (PI * PI - 4.0 * PI * r + 2.0 * r * r) / 16.0
}

/// `η*' = (x - π)/4` in the between-peaks coordinate.
fn slope_star_between(x: f64) -> f64 {
    0.25 * (x - PI)
}

/// Characteristics state: interior labels `s_j = j·2π/m`, `j = 1..m-1`,
/// plus the distinguished peak value `Z₀` at the pinned ends `x = 0, 2π`.
#[derive(Debug, Clone)]
pub struct PerturbationState {
    pub time: f64,
    /// Interior label coordinates (fixed in time).
    pub labels: Vec<f64>,
    /// `X(t, s_j)`, strictly increasing in `(0, 2π)`.
    pub positions: Vec<f64>,
    /// `Z(t, s_j) = ζ(t, X_j)`.
    pub values: Vec<f64>,
    /// `V(t, s_j) = ∂x ζ(t, X_j)`.
    pub slopes: Vec<f64>,
    /// `Z₀(t) = ζ(t, 0)`.
    pub peak_value: f64,
}

impl PerturbationState {
    /// Sample initial data `ζ₀` (with slope `ζ₀'`) on `m` uniform labels.
    pub fn from_profile(
        m: usize,
        zeta: impl Fn(f64) -> f64,
        zeta_slope: impl Fn(f64) -> f64,
    ) -> Result<Self, CharEvalError> {
        if m < 16 {
            return Err(CharEvalError::TooFewLabels(m));
        }
        let ds = 2.0 * PI / m as f64;
        let labels: Vec<f64> = (1..m).map(|j| j as f64 * ds).collect();
        Ok(Self {
            time: 0.0,
            positions: labels.clone(),
            values: labels.iter().map(|&s| zeta(s)).collect(),
            slopes: labels.iter().map(|&s| zeta_slope(s)).collect(),
            peak_value: zeta(0.0),
            labels,
        })
    }

    /// The default experiment family `ζ₀ = a·x(2π - x)` with
    /// `a = -δ/(2π)`, so that `V₀(0) = ζ₀'(0⁺) = -δ`.
    pub fn quadratic_family(m: usize, delta: f64) -> Result<Self, CharEvalError> {
        let a = -delta / (2.0 * PI);
        Self::from_profile(
            m,
            move |x| a * x * (2.0 * PI - x),
            move |x| a * (2.0 * PI - 2.0 * x),
        )
    }

    fn interior(&self) -> usize {
        self.labels.len()
    }

    fn flatten(&self) -> Vec<f64> {
        let n = self.interior();
        let mut y = Vec::with_capacity(3 * n + 1);
        y.extend_from_slice(&self.positions);
        y.extend_from_slice(&self.values);
        y.extend_from_slice(&self.slopes);
        y.push(self.peak_value);
        y
    }

    fn unflatten(&self, y: &[f64], time: f64) -> Self {
        let n = self.interior();
        Self {
            time,
            labels: self.labels.clone(),
            positions: y[..n].to_vec(),
            values: y[n..2 * n].to_vec(),
            slopes: y[2 * n..3 * n].to_vec(),
            peak_value: y[3 * n],
        }
    }

    /// Smallest spacing of the pinned-node position list.
    pub fn min_spacing(&self) -> f64 {
        let mut prev = 0.0;
        let mut min = f64::INFINITY;
        for &x in &self.positions {
            min = min.min(x - prev);
            prev = x;
        }
        min.min(2.0 * PI - prev)
    }

    /// `‖ζ‖_{W^{1,∞}}` on the carried data.
    pub fn w1inf(&self) -> f64 {
        let z = self
            .values
            .iter()
            .fold(self.peak_value.abs(), |m, v| m.max(v.abs()));
        let v = self.slopes.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        z.max(v)
    }
}

/// `Π₀∂x⁻¹Π₀ u` on a strictly increasing position list spanning one
/// period `[0, 2π]` (endpoints included): subtract the trapezoid mean,
/// integrate cumulatively, subtract the mean of the primitive. The
/// construction makes `trapz(result) = 0` exact.
pub fn nonlocal_antiderivative(
    positions: &[f64],
    values: &[f64],
) -> Result<Vec<f64>, CharEvalError> {
    assert_eq!(positions.len(), values.len());
    let n = positions.len();
    for i in 1..n {
        if positions[i] <= positions[i - 1] {
            return Err(CharEvalError::NonMonotone {
                index: i,
                left: positions[i - 1],
                right: positions[i],
            });
        }
    }
    let span = positions[n - 1] - positions[0];
    let mut mass = 0.0;
    for i in 1..n {
        mass += 0.5 * (positions[i] - positions[i - 1]) * (values[i] + values[i - 1]);
    }
    let mean = mass / span;

    let mut primitive = vec![0.0_f64; n];
    for i in 1..n {
        primitive[i] = primitive[i - 1]
            + 0.5 * (positions[i] - positions[i - 1]) * (values[i] - mean + values[i - 1] - mean);
    }
    let mut pmass = 0.0;
    for i in 1..n {
        pmass += 0.5 * (positions[i] - positions[i - 1]) * (primitive[i] + primitive[i - 1]);
    }
    let pmean = pmass / span;
    for p in primitive.iter_mut() {
        *p -= pmean;
    }
    Ok(primitive)
}

/// Time derivatives of the characteristic system.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub peak_value: f64,
}

/// Assemble the full pinned node lists (positions with 0 and 2π, values
/// with Z₀ at both ends, slope proxies V₁/V_{m-1} at the ends).
fn full_nodes(state: &PerturbationState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = state.interior();
    let mut xs = Vec::with_capacity(n + 2);
    let mut zs = Vec::with_capacity(n + 2);
    let mut vs = Vec::with_capacity(n + 2);
    xs.push(0.0);
    zs.push(state.peak_value);
    vs.push(state.slopes[0]);
    xs.extend_from_slice(&state.positions);
    zs.extend_from_slice(&state.values);
    vs.extend_from_slice(&state.slopes);
    xs.push(2.0 * PI);
    zs.push(state.peak_value);
    vs.push(state.slopes[n - 1]);
    (xs, zs, vs)
}

/// Right-hand side of the characteristic system.
pub fn rhs(state: &PerturbationState) -> Result<Derivatives, CharEvalError> {
    let n = state.interior();
    let two_cs = 2.0 * c_star();
    let (xs, zs, vs) = full_nodes(state);

    // Stieltjes form of ∮ η*' ζ dx = ∮ ζ dη*(X): exact partner of the
    // telescoping transport terms in d/dt trapz(Z).
    let mut iq = 0.0;
    for k in 0..xs.len() - 1 {
        iq += 0.5
            * (eta_star_between(xs[k + 1]) - eta_star_between(xs[k]))
            * (zs[k] + zs[k + 1]);
    }

    // Π₀∂x⁻¹Π₀ (ζ + 2(∂xζ)²) at the moving nodes.
    let u: Vec<f64> = zs
        .iter()
        .zip(&vs)
        .map(|(z, v)| z + 2.0 * v * v)
        .collect();
    let p = nonlocal_antiderivative(&xs, &u)?;

    let mut d_positions = Vec::with_capacity(n);
    let mut d_values = Vec::with_capacity(n);
    let mut d_slopes = Vec::with_capacity(n);
    for j in 0..n {
        let x = state.positions[j];
        let z = state.values[j];
        let v = state.slopes[j];
        let coef = 0.25 * x * (2.0 * PI - x); // c*² - 2η*(x)
        d_positions.push((-coef + 2.0 * (z - state.peak_value)) / two_cs);
        d_values.push((-iq / PI + 0.5 * p[j + 1]) / two_cs);
        d_slopes.push(
            (-2.0 * slope_star_between(x) * v - v * v + 0.5 * (z + state.peak_value)) / two_cs,
        );
    }

    // Ż₀ = -(1/π) d/dt[trapz(V²)], expanded through Ẋ and V̇ so that the
    // blow-up invariant Z₀ + (1/π)∮(∂xζ)² dx is exactly conserved by the
    // semi-discrete flow; consistent with (2/π)∮η*'(∂xζ)²/(2c*) through
    // the momentum identity.
    let mut dxs = Vec::with_capacity(n + 2);
    dxs.push(0.0);
    dxs.extend_from_slice(&d_positions);
    dxs.push(0.0);
    let mut gdot = Vec::with_capacity(n + 2);
    gdot.push(2.0 * state.slopes[0] * d_slopes[0]);
    for j in 0..n {
        gdot.push(2.0 * state.slopes[j] * d_slopes[j]);
    }
    gdot.push(2.0 * state.slopes[n - 1] * d_slopes[n - 1]);
    let g: Vec<f64> = vs.iter().map(|v| v * v).collect();
    let mut trapz_v2_dot = 0.0;
    for k in 0..xs.len() - 1 {
        trapz_v2_dot += 0.5 * (dxs[k + 1] - dxs[k]) * (g[k] + g[k + 1]);
        trapz_v2_dot += 0.5 * (xs[k + 1] - xs[k]) * (gdot[k] + gdot[k + 1]);
    }
    let d_peak = -trapz_v2_dot / PI;

    // The trapezoid mass ∮ζ dx weights the pinned ends with Ż₀, which
    // deviates from the interior Ż expression by the O(Δs²) quadrature
    // defect of the constraint identity. Distribute the compensating
    // O(Δs³) shift over the interior values so the discrete mass is
    // conserved exactly as well (a consistent perturbation two orders
    // below the scheme's accuracy).
    let end_weight = 0.5 * (xs[1] + 2.0 * PI - xs[n]);
    let peak_formula = (-iq / PI + 0.5 * p[0]) / two_cs;
    let mass_defect = (d_peak - peak_formula) * end_weight;
    let shift = -mass_defect / (2.0 * PI - end_weight);
    for dv in d_values.iter_mut() {
        *dv += shift;
    }

    Ok(Derivatives {
        positions: d_positions,
        values: d_values,
        slopes: d_slopes,
        peak_value: d_peak,
    })
}

/// Conserved and diagnostic functionals of one state.
#[derive(Debug, Clone, Copy)]
pub struct ConservedSet {
    /// `∮ ζ dx` (conserved).
    pub mass_zeta: f64,
    /// `Z₀ + (1/π) ∮ (∂x ζ)² dx` (conserved).
    pub blowup_invariant: f64,
    /// `M(η* + ζ)` (diagnostic).
    pub full_mass: f64,
    /// `Q(η* + ζ)` (diagnostic).
    pub momentum: f64,
    /// `H(η* + ζ)` (diagnostic).
    pub energy: f64,
}

/// Evaluate the conserved pair and the full-wave diagnostics by trapezoid
/// over the moving nodes.
pub fn conserved_set(state: &PerturbationState) -> ConservedSet {
    let (xs, zs, vs) = full_nodes(state);
    let m = xs.len();

    let mut mass_zeta = 0.0;
    let mut v2 = 0.0;
    for k in 0..m - 1 {
        let dx = xs[k + 1] - xs[k];
        mass_zeta += 0.5 * dx * (zs[k] + zs[k + 1]);
        v2 += 0.5 * dx * (vs[k] * vs[k] + vs[k + 1] * vs[k + 1]);
    }

    // Full wave η = η* + ζ; the peak endpoints carry one-sided total
    // slopes η*'(0⁺) + V(0⁺) and η*'(2π⁻) + V(2π⁻).
    let eta: Vec<f64> = xs
        .iter()
        .zip(&zs)
        .map(|(&x, z)| eta_star_between(x) + z)
        .collect();
    let mut slope_sq = vec![0.0_f64; m];
    for k in 1..m - 1 {
        let s = slope_star_between(xs[k]) + vs[k];
        slope_sq[k] = s * s;
    }
    let right = -PI / 4.0 + vs[0];
    let left = PI / 4.0 + vs[m - 1];
    slope_sq[0] = 0.5 * (right * right + left * left);
    slope_sq[m - 1] = slope_sq[0];

    let mut full_mass = 0.0;
    let mut momentum = 0.0;
    let mut energy = 0.0;
    for k in 0..m - 1 {
        let dx = xs[k + 1] - xs[k];
        full_mass += 0.5 * dx * (eta[k] + eta[k + 1]);
        momentum += 0.25 * dx * (slope_sq[k] + slope_sq[k + 1]);
        let hk = eta[k] * eta[k] + 2.0 * eta[k] * slope_sq[k];
        let hk1 = eta[k + 1] * eta[k + 1] + 2.0 * eta[k + 1] * slope_sq[k + 1];
        energy += 0.25 * dx * (hk + hk1);
    }

    ConservedSet {
        mass_zeta,
        blowup_invariant: state.peak_value + v2 / PI,
        full_mass,
        momentum,
        energy,
    }
}

/// `(M, Q, H) = (∮η dx, ½∮(∂xη)² dx, ½∮[η² + 2η(∂xη)²] dx)` of a periodic
/// grid function given by one period of values and slopes (uniform grid).
pub fn full_conserved(values: &[f64], slopes: &[f64], h: f64) -> (f64, f64, f64) {
    assert_eq!(values.len(), slopes.len());
    let mut m = 0.0;
    let mut q = 0.0;
    let mut e = 0.0;
    for (v, s) in values.iter().zip(slopes) {
        m += v;
        q += s * s;
        e += v * v + 2.0 * v * s * s;
    }
    (h * m, 0.5 * h * q, 0.5 * h * e)
}

/// As [`full_conserved`] for a wave profile, honoring the one-sided crest
/// slopes through `slope_sq`.
pub fn full_conserved_profile(profile: &WaveProfile) -> (f64, f64, f64) {
    let m2 = 2 * profile.grid.n_half();
    let h = profile.grid.step();
    let mut m = 0.0;
    let mut q = 0.0;
    let mut e = 0.0;
    for k in 0..m2 {
        let v = profile.values[k];
        let s2 = profile.slope_sq(k);
        m += v;
        q += s2;
        e += v * v + 2.0 * v * s2;
    }
    (h * m, 0.5 * h * q, 0.5 * h * e)
}

/// Why a trajectory stopped before its nominal end time.
#[derive(Debug, Clone)]
pub struct BreakingReport {
    pub time: f64,
    pub reason: String,
}

/// Per-step scalar record of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub time: f64,
    /// Slope at the first label after the peak (tracks `V₀`).
    pub v0: f64,
    pub conserved: ConservedSet,
    pub w1inf: f64,
    pub h1_norm: f64,
    pub min_spacing: f64,
    pub max_abs_v: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub breaking: Option<BreakingReport>,
    pub final_state: PerturbationState,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Stop when max |V| exceeds this (gradient blow-up underway).
    pub v_cap: f64,
    /// Stop when the smallest node spacing falls below
    /// `spacing_floor · 2π/m` (characteristic crossing imminent).
    pub spacing_floor: f64,
    /// Record every `record_stride`-th step (the initial and final states
    /// are always recorded).
    pub record_stride: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end: 5.0,
            dt: 1e-3,
            v_cap: 1e3,
            spacing_floor: 1e-6,
            record_stride: 1,
        }
    }
}

fn record(state: &PerturbationState) -> StepRecord {
    let conserved = conserved_set(state);
    let (xs, zs, vs) = full_nodes(state);
    let mut h1 = 0.0;
    for k in 0..xs.len() - 1 {
        let dx = xs[k + 1] - xs[k];
        h1 += 0.5
            * dx
            * (zs[k] * zs[k] + vs[k] * vs[k] + zs[k + 1] * zs[k + 1] + vs[k + 1] * vs[k + 1]);
    }
    StepRecord {
        time: state.time,
        v0: state.slopes[0],
        conserved,
        w1inf: state.w1inf(),
        h1_norm: h1.sqrt(),
        min_spacing: state.min_spacing(),
        max_abs_v: state.slopes.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
    }
}

/// March the characteristic system with classical RK4. Breaking is an
/// expected outcome, reported in the trajectory, not an error.
pub fn evolve(
    initial: &PerturbationState,
    config: &EvolveConfig,
) -> Result<Trajectory, CharEvalError> {
    if !(config.dt > 0.0) || !config.dt.is_finite() {
        return Err(CharEvalError::BadTimeStep(config.dt));
    }
    let m = initial.interior() + 1;
    let spacing_limit = config.spacing_floor * 2.0 * PI / m as f64;
    let steps = (config.t_end / config.dt).round() as usize;
    let stride = config.record_stride.max(1);

    let mut state = initial.clone();
    let mut records = vec![record(&state)];
    let mut breaking = None;

    let deriv_flat = |t: f64, y: &[f64]| -> Vec<f64> {
        let s = initial.unflatten(y, t);
        match rhs(&s) {
            Ok(d) => {
                let n = s.interior();
                let mut out = Vec::with_capacity(3 * n + 1);
                out.extend_from_slice(&d.positions);
                out.extend_from_slice(&d.values);
                out.extend_from_slice(&d.slopes);
                out.push(d.peak_value);
                out
            }
            // Crossing inside a stage: freeze the state; the monotonicity
            // check below stops the march at this step.
            Err(_) => vec![0.0; y.len()],
        }
    };

    let mut y = state.flatten();
    for step in 1..=steps {
        let t = state.time;
        y = rk4_step(&deriv_flat, t, &y, config.dt);
        state = initial.unflatten(&y, t + config.dt);

        let min_spacing = state.min_spacing();
        let max_v = state.slopes.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if min_spacing < spacing_limit || !min_spacing.is_finite() {
            breaking = Some(BreakingReport {
                time: state.time,
                reason: format!("characteristic spacing {min_spacing:.3e} below limit"),
            });
        } else if max_v > config.v_cap {
            breaking = Some(BreakingReport {
                time: state.time,
                reason: format!("slope magnitude {max_v:.3e} exceeded the cap"),
            });
        }
        if step % stride == 0 || breaking.is_some() || step == steps {
            records.push(record(&state));
        }
        if breaking.is_some() {
            break;
        }
    }

    Ok(Trajectory {
        records,
        breaking,
        final_state: state,
    })
}

/// Result of the gradient blow-up experiment.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// `(t, V₀(t))` series.
    pub v0_series: Vec<(f64, f64)>,
    /// `(t, ‖ζ‖_{W^{1,∞}})` series.
    pub w1inf_series: Vec<(f64, f64)>,
    /// Least-squares growth rate of `log|V₀|` over the early window
    /// `|V₀| ≤ 10 |V₀(0)|`.
    pub fitted_rate: f64,
    /// Linear-theory rate `π/(4c*) = √2/2`.
    pub theory_rate: f64,
    /// First time `‖ζ‖_{W^{1,∞}}` reaches 1, if reached.
    pub blowup_time: Option<f64>,
    pub breaking: Option<BreakingReport>,
}

/// Theoretical growth rate `π/(4c*) = √2/2`.
pub fn instability_theory_rate() -> f64 {
    PI / (4.0 * c_star())
}

/// Run the default quadratic-family experiment at strength `δ`: evolve,
/// extract `V₀(t)`, fit the early-window exponential rate, and find the
/// unit-threshold crossing of the `W^{1,∞}` norm.
pub fn instability_experiment(
    delta: f64,
    t_end: f64,
    dt: f64,
    labels: usize,
) -> Result<ExperimentResult, CharEvalError> {
    let initial = PerturbationState::quadratic_family(labels, delta)?;
    let config = EvolveConfig {
        t_end,
        dt,
        record_stride: ((1e-2 / dt).round() as usize).max(1),
        ..EvolveConfig::default()
    };
    let trajectory = evolve(&initial, &config)?;

    let v0_series: Vec<(f64, f64)> = trajectory
        .records
        .iter()
        .map(|r| (r.time, r.v0))
        .collect();
    let w1inf_series: Vec<(f64, f64)> = trajectory
        .records
        .iter()
        .map(|r| (r.time, r.w1inf))
        .collect();

    // Least squares on log|V₀| over the early window.
    let v0_start = v0_series[0].1.abs();
    let window: Vec<(f64, f64)> = v0_series
        .iter()
        .filter(|(_, v)| v.abs() <= 10.0 * v0_start && v.abs() > 0.0)
        .map(|&(t, v)| (t, v.abs().ln()))
        .collect();
    let fitted_rate = if window.len() >= 2 {
        let n = window.len() as f64;
        let sx: f64 = window.iter().map(|p| p.0).sum();
        let sy: f64 = window.iter().map(|p| p.1).sum();
        let sxx: f64 = window.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = window.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::NAN
    };

    let blowup_time = w1inf_series
        .iter()
        .find(|(_, w)| *w >= 1.0)
        .map(|&(t, _)| t);

    Ok(ExperimentResult {
        v0_series,
        w1inf_series,
        fitted_rate,
        theory_rate: instability_theory_rate(),
        blowup_time,
        breaking: trajectory.breaking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::adaptive_quad;
    use crate::waveprofile::{peaked_profile, Grid};

    #[test]
    fn antiderivative_of_cosine_is_sine_over_n() {
        let m = 256;
        let xs: Vec<f64> = (0..=m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
        for n in [1_u32, 3] {
            let u: Vec<f64> = xs.iter().map(|&x| (n as f64 * x).cos()).collect();
            let p = nonlocal_antiderivative(&xs, &u).unwrap();
            for (x, v) in xs.iter().zip(&p) {
                let exact = (n as f64 * x).sin() / n as f64;
                assert!((v - exact).abs() < 5e-4, "n={n}, x={x}: {v} vs {exact}");
            }
        }
        // Constants are annihilated.
        let ones = vec![1.0; xs.len()];
        let p = nonlocal_antiderivative(&xs, &ones).unwrap();
        for v in &p {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn antiderivative_rejects_crossed_positions() {
        let xs = vec![0.0, 1.0, 0.9, 2.0 * PI];
        let u = vec![0.0; 4];
        assert!(matches!(
            nonlocal_antiderivative(&xs, &u),
            Err(CharEvalError::NonMonotone { index: 2, .. })
        ));
    }

    #[test]
    fn antiderivative_of_bandlimited_delta_tracks_slope_identity() {
        // Π₀∂x⁻¹Π₀ δ₀ = -(2/π) η*' up to the band limit and the trapezoid
        // error of integrating the Dirichlet kernel.
        let n = 256;
        let m = 2 * n;
        let xs: Vec<f64> = (0..=m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
        let delta: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let mut acc = 1.0;
                for k in 1..n {
                    acc += 2.0 * (k as f64 * x).cos();
                }
                acc / (2.0 * PI)
            })
            .collect();
        let p = nonlocal_antiderivative(&xs, &delta).unwrap();
        let mut err_sq = 0.0;
        for k in 0..m {
            let x = xs[k];
            // η*' between peaks is (x - π)/4; the identity value at the
            // jump nodes themselves is excluded (band-limit defect).
            if x > 0.3 && x < 2.0 * PI - 0.3 {
                let expect = -(2.0 / PI) * 0.25 * (x - PI);
                err_sq += (p[k] - expect).powi(2) * (2.0 * PI / m as f64);
            }
        }
        assert!(err_sq.sqrt() < 2e-2, "L² deviation {}", err_sq.sqrt());
    }

    #[test]
    fn zero_perturbation_moves_labels_at_characteristic_speed() {
        let state = PerturbationState::from_profile(64, |_| 0.0, |_| 0.0).unwrap();
        let d = rhs(&state).unwrap();
        for j in 0..state.interior() {
            let x = state.positions[j];
            let expect = -(0.25 * x * (2.0 * PI - x)) / (2.0 * c_star());
            assert!((d.positions[j] - expect).abs() < 1e-14);
            assert!(d.values[j].abs() < 1e-15);
            assert!(d.slopes[j].abs() < 1e-15);
        }
        assert_eq!(d.peak_value, 0.0);
    }

    #[test]
    fn linear_regime_matches_operator_a() {
        // For ζ = ε sin x the nonlocal part of 2c*Ż must match the
        // nonlocal terms of Aζ to O(ε²) + O(Δs²).
        let eps = 1e-6;
        let m = 512;
        let state =
            PerturbationState::from_profile(m, |x| eps * x.sin(), |x| eps * x.cos()).unwrap();
        let d = rhs(&state).unwrap();

        let grid = Grid::new(m / 2).unwrap();
        let op = crate::peakedops::PeakedOperator::new(grid);
        let zeta: Vec<f64> = (0..grid.len()).map(|k| eps * grid.node(k).sin()).collect();
        let a_zeta = op.apply_a_real(&zeta);

        // Compare at interior labels: 2c* Ż - (c*²-2η*)V should equal the
        // nonlocal A-terms; at t = 0 positions coincide with labels.
        let two_cs = 2.0 * c_star();
        let mut worst = 0.0_f64;
        for j in 0..state.interior() {
            let x = state.positions[j]; // between-peaks coordinate
            let nonlocal_char = two_cs * d.values[j];
            // Map x ∈ (0, 2π) to the grid index of the symmetric grid.
            let xg = if x <= PI { x } else { x - 2.0 * PI };
            let k = ((xg + PI) / grid.step()).round() as usize;
            let local = 0.25 * x * (2.0 * PI - x) * eps * x.cos();
            let nonlocal_a = a_zeta[k] - local;
            worst = worst.max((nonlocal_char - nonlocal_a).abs());
        }
        assert!(worst < 20.0 * eps * eps + 1e-9, "deviation {worst}");
    }

    #[test]
    fn semidiscrete_flow_conserves_the_pair_exactly() {
        // One RK4 step leaves the semi-discretely conserved pair at
        // rounding level regardless of the label count.
        let state = PerturbationState::quadratic_family(128, 0.05).unwrap();
        let before = conserved_set(&state);
        let traj = evolve(
            &state,
            &EvolveConfig {
                t_end: 0.5,
                dt: 2.5e-3,
                ..EvolveConfig::default()
            },
        )
        .unwrap();
        let after = conserved_set(&traj.final_state);
        assert!(
            (after.mass_zeta - before.mass_zeta).abs() < 1e-13,
            "mass drift {}",
            (after.mass_zeta - before.mass_zeta).abs()
        );
        assert!(
            (after.blowup_invariant - before.blowup_invariant).abs() < 1e-13,
            "blow-up invariant drift {}",
            (after.blowup_invariant - before.blowup_invariant).abs()
        );
    }

    #[test]
    fn momentum_identity_along_the_flow() {
        // c* d/dt ∮(∂xζ)² = -∮η*'(∂xζ)²: central-difference the left side
        // and compare with the pointwise trapezoid of the right side.
        // Needs asymmetric data (for data even about the peak the right
        // side vanishes identically by parity).
        let amp = 0.05;
        let state = PerturbationState::from_profile(
            512,
            move |x| amp * (x.sin() + 0.5 * (1.0 - (2.0 * x).cos())),
            move |x| amp * (x.cos() + (2.0 * x).sin()),
        )
        .unwrap();
        let dt = 1e-5;
        let traj = evolve(
            &state,
            &EvolveConfig {
                t_end: 2.0 * dt,
                dt,
                ..EvolveConfig::default()
            },
        )
        .unwrap();
        let v2 = |s: &PerturbationState| {
            let (xs, _, vs) = full_nodes(s);
            let mut acc = 0.0;
            for k in 0..xs.len() - 1 {
                acc += 0.5 * (xs[k + 1] - xs[k]) * (vs[k] * vs[k] + vs[k + 1] * vs[k + 1]);
            }
            acc
        };
        let lhs = c_star() * (v2(&traj.final_state) - v2(&state)) / (2.0 * dt);
        // Right side at the midpoint state.
        let mid = evolve(
            &state,
            &EvolveConfig {
                t_end: dt,
                dt,
                ..EvolveConfig::default()
            },
        )
        .unwrap()
        .final_state;
        let (xs, _, vs) = full_nodes(&mid);
        let mut rhs_quad = 0.0;
        for k in 0..xs.len() - 1 {
            let a = slope_star_between(xs[k]) * vs[k] * vs[k];
            let b = slope_star_between(xs[k + 1]) * vs[k + 1] * vs[k + 1];
            rhs_quad += 0.5 * (xs[k + 1] - xs[k]) * (a + b);
        }
        assert!(
            rhs_quad.abs() > 1e-6,
            "test data must make the identity nontrivial: {rhs_quad}"
        );
        assert!(
            (lhs + rhs_quad).abs() < 1e-4 * rhs_quad.abs(),
            "c* d/dt∮V² = {lhs} vs -∮η*'V² = {}",
            -rhs_quad
        );
    }

    #[test]
    fn constraint_identity_between_quadratures() {
        // ∮[ζ + 2η*'∂xζ + (∂xζ)²] dx = ½∮[ζ + 2(∂xζ)²] dx + πζ(0): the
        // distributional integration by parts against the corner of η*,
        // checked discretely at t = 0 on asymmetric data.
        let amp = 0.08;
        let state = PerturbationState::from_profile(
            1024,
            move |x| amp * ((x.sin() + 0.3 * (3.0 * x).cos()) - 0.3),
            move |x| amp * (x.cos() - 0.9 * (3.0 * x).sin()),
        )
        .unwrap();
        let (xs, zs, vs) = full_nodes(&state);
        let mut lhs = 0.0;
        let mut rhs_half = 0.0;
        for k in 0..xs.len() - 1 {
            let dx = xs[k + 1] - xs[k];
            let f = |i: usize| {
                zs[i] + 2.0 * slope_star_between(xs[i]) * vs[i] + vs[i] * vs[i]
            };
            let g = |i: usize| zs[i] + 2.0 * vs[i] * vs[i];
            lhs += 0.5 * dx * (f(k) + f(k + 1));
            rhs_half += 0.25 * dx * (g(k) + g(k + 1));
        }
        let rhs = rhs_half + PI * state.peak_value;
        // Trapezoid accuracy: the η*' cross term carries the corner, so
        // O(Δs²) with a modest constant.
        assert!(
            (lhs - rhs).abs() < 1e-4,
            "constraint identity: {lhs} vs {rhs}"
        );
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let state = PerturbationState::from_profile(64, |_| 0.0, |_| 0.0).unwrap();
        let traj = evolve(
            &state,
            &EvolveConfig {
                t_end: 0.2,
                dt: 1e-3,
                ..EvolveConfig::default()
            },
        )
        .unwrap();
        assert!(traj.breaking.is_none());
        for r in &traj.records {
            assert!(r.w1inf == 0.0 && r.conserved.mass_zeta == 0.0);
        }
    }

    #[test]
    fn characteristics_stay_a_diffeomorphism_until_breaking() {
        // ∂sX > 0 at every recorded step: positions strictly increasing in
        // the label (checked through the minimum spacing); the one-way
        // transport in the co-moving frame drags every label toward the
        // peak but never across its neighbor before the breaking report.
        let state = PerturbationState::quadratic_family(128, 0.1).unwrap();
        let traj = evolve(
            &state,
            &EvolveConfig {
                t_end: 2.0,
                dt: 1e-3,
                ..EvolveConfig::default()
            },
        )
        .unwrap();
        for r in &traj.records {
            assert!(r.min_spacing > 0.0, "crossed at t = {}", r.time);
        }
        let s = &traj.final_state;
        for w in s.positions.windows(2) {
            assert!(w[1] > w[0]);
        }
        // The labels have visibly drifted toward the peak.
        assert!(s.positions[0] < s.labels[0]);
    }

    #[test]
    fn peak_value_is_conserved_in_the_linear_regime() {
        // Z₀ drift is O(ε²) for data of size ε.
        let eps = 1e-4;
        let state = PerturbationState::quadratic_family(128, eps).unwrap();
        let traj = evolve(
            &state,
            &EvolveConfig {
                t_end: 1.0,
                dt: 1e-3,
                ..EvolveConfig::default()
            },
        )
        .unwrap();
        let drift = (traj.final_state.peak_value - state.peak_value).abs();
        assert!(drift < 10.0 * eps * eps, "Z₀ drift {drift}");
    }

    #[test]
    fn full_conserved_anchors() {
        // η = 0 and η = cos x.
        let n = 128;
        let h = 2.0 * PI / n as f64;
        let zero = vec![0.0; n];
        assert_eq!(full_conserved(&zero, &zero, h), (0.0, 0.0, 0.0));
        let xs: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        let vals: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let slopes: Vec<f64> = xs.iter().map(|x| -x.sin()).collect();
        let (m, q, e) = full_conserved(&vals, &slopes, h);
        assert!(m.abs() < 1e-13);
        assert!((q - PI / 2.0).abs() < 1e-12);
        assert!((e - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn full_conserved_of_peaked_wave_matches_closed_forms() {
        // M = -π³/24, Q = π³/48; H cross-checked against an independent
        // quadrature of the closed-form integrand (= 3π⁵/1280).
        let grid = Grid::new(400).unwrap();
        let p = peaked_profile(&grid);
        let (m, q, e) = full_conserved_profile(&p);
        assert!((m + PI.powi(3) / 24.0).abs() < 1e-4, "M = {m}");
        assert!((q - PI.powi(3) / 48.0).abs() < 1e-4, "Q = {q}");
        let oracle = adaptive_quad(
            |x| {
                let eta = crate::waveprofile::peaked_eta(x);
                let sl = crate::waveprofile::peaked_slope(x);
                0.5 * (eta * eta + 2.0 * eta * sl * sl)
            },
            -PI,
            PI,
            1e-12,
        )
        .unwrap()
        .value;
        assert!((oracle - 3.0 * PI.powi(5) / 1280.0).abs() < 1e-10, "oracle {oracle}");
        assert!((e - oracle).abs() < 1e-4, "H = {e} vs {oracle}");
    }

    #[test]
    fn instability_grows_and_breaks() {
        // A strong kick reaches the slope cap / breaking quickly.
        let result = instability_experiment(0.3, 12.0, 2e-3, 128).unwrap();
        assert!(result.fitted_rate > 0.0);
        let last_w = result.w1inf_series.last().unwrap().1;
        assert!(
            result.breaking.is_some() || last_w > 0.5,
            "expected instability to develop: w1inf = {last_w}"
        );
        // V₀ decreases (grows in magnitude, negative).
        let first = result.v0_series.first().unwrap().1;
        let last = result.v0_series.last().unwrap().1;
        assert!(first < 0.0 && last < first);
    }

    #[test]
    fn fitted_rate_approaches_linear_theory() {
        let result = instability_experiment(1e-2, 6.0, 1e-3, 256).unwrap();
        let rel = (result.fitted_rate - result.theory_rate).abs() / result.theory_rate;
        assert!(
            rel < 0.15,
            "rate {} vs theory {} ({}%)",
            result.fitted_rate,
            result.theory_rate,
            100.0 * rel
        );
    }
}
