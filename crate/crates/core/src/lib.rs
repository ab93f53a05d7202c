//! Spectral toolkit for fractional Sobolev spaces on periodic boxes.
//!
//! Everything is built on uniform grids over `[-L, L)^N` (N = 1 or 2) and
//! FFT-diagonalized Fourier multipliers: fractional Laplacians, Riesz and
//! Bessel potentials, discrete `H^{s,p}` seminorms, and negative-order dual
//! norms over a compactly contained domain. On top of the operators sit an
//! obstacle-problem solver (a projected gradient method with energy
//! monotonicity), dense cross-checking oracles, dual-norm maximizers,
//! convergence experiment drivers, and a quasi-variational solver whose
//! obstacle depends on the solution.
//!
//! Numerical non-convergence is a first-class outcome: iterative solvers
//! return partial states with `converged = false` rather than panicking,
//! and invalid problem data is rejected eagerly with [`Error`].

pub mod dense;
pub mod dual;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod grid;
pub mod norms;
pub mod qvi;
pub mod spectral;
pub mod vi;

pub use error::{Error, Result};
pub use grid::{DomainMask, Grid, GridFunction};
pub use spectral::{
    apply_multiplier, bessel_inverse, frac_laplacian, riesz_potential, MultiplierSymbol,
    ZeroModePolicy,
};
