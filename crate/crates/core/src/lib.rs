//! Periodic traveling waves of a Hunter-Saxton-type shallow water model.
//!
//! The model is `2c η_tx = (c² - 2η) η_xx - (η_x)² + η` on the 2π-periodic
//! domain. This crate computes the smooth traveling-wave family for speeds
//! `c ∈ (1, c*)` and the limiting peaked wave at `c* = π/(2√2)`, assembles
//! the linearized (Hessian) operator in finite-difference and Fourier
//! collocation form, probes the spectrum of the peaked-wave linearization
//! (point spectrum filling the open strip `|Re λ| < π/4`, resolvent bounds
//! outside), and evolves perturbations of the peaked wave by the method of
//! characteristics up to gradient blow-up.
//!
//! Modules mirror the pipeline:
//!
//! * [`specfun`] — complete elliptic integral `E(κ)` and adaptive quadrature.
//! * [`waveprofile`] — wave profiles, period function, discrete Fourier
//!   transform of grid functions.
//! * [`hessian`] — discretizations of `L = -∂x(c²-2η)∂x + (2η''-1)` and
//!   their spectra.
//! * [`peakedops`] — the peaked-wave operators `A`, `A₀`, `D₀`, closed-form
//!   eigenfunctions, and resolvent probes.
//! * [`chareval`] — nonlinear perturbation dynamics along characteristics.
//! * [`verify`] — the end-to-end check battery used by the CLI and the
//!   acceptance suite.

pub mod chareval;
pub mod fourier;
pub mod hessian;
pub mod linalg;
pub mod ode;
pub mod peakedops;
pub mod specfun;
pub mod util;
pub mod verify;
pub mod waveprofile;

pub use num_complex::Complex64;
