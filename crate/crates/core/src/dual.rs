//! Negative-order dual norms of distributions over a masked domain.
//!
//! At q = 2 the dual norm is computed exactly through the Riesz
//! representative: solve the order-2s Galerkin problem and take the H^s
//! seminorm of the solution. For q in (1, 2) the norm is approximated from
//! below by maximizing the pairing h[phi] over the unit ball
//! ||laps{s} phi||_{q'} <= 1, with a stagnation certificate.

use crate::error::{Error, Result};
use crate::grid::{DomainMask, GridFunction};
use crate::norms::{hsp_seminorm, lp_norm, NormParams};
use crate::spectral::frac_laplacian;
use crate::vi::solve_unconstrained;

/// Controls for the ascent in [`dual_norm_q`].
#[derive(Debug, Clone, Copy)]
pub struct DualNormOptions {
    /// Stagnation certificate: relative progress over the last 10 accepted
    /// iterations must drop below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DualNormOptions {
    fn default() -> Self {
        DualNormOptions {
            tol: 1e-7,
            max_iter: 4_000,
        }
    }
}

/// Lower bound for a dual norm together with its certificate.
#[derive(Debug, Clone)]
pub struct DualNormResult {
    pub value: f64,
    /// The admissible maximizer realizing `value`; unit q'-seminorm, masked.
    pub maximizer: GridFunction,
    pub iterations: usize,
    /// Relative change of the value over the last 10 iterations at exit.
    pub certificate_gap: f64,
    /// False when `max_iter` ran out before the certificate was reached.
    pub certified: bool,
}

/// H^{-s,2} dual norm of h over masked fields, via the Riesz representative:
/// ||h|| = ||laps{s} u||_2 where u solves the order-2s Galerkin problem.
pub fn dual_norm_2(h: &GridFunction, mask: &DomainMask, s: f64) -> Result<f64> {
    let u = solve_unconstrained(h, mask, s, 1e-10)?;
    hsp_seminorm(&u, NormParams::new(s, 2.0)?)
}

/// H^{-s,q} dual norm of h for q in (1, 2), from below: projected gradient
/// ascent on phi -> h[phi] over the ball ||laps{s} phi||_{q'} <= 1, started
/// at the q = 2 Riesz maximizer.
pub fn dual_norm_q(
    h: &GridFunction,
    mask: &DomainMask,
    s: f64,
    q: f64,
    opts: &DualNormOptions,
) -> Result<DualNormResult> {
    if !(q.is_finite() && q > 1.0 && q < 2.0) {
        return Err(Error::invalid(
            "q",
            format!("must lie in (1, 2), got {q}; use dual_norm_2 for q = 2"),
        ));
    }
    let riesz = solve_unconstrained(h, mask, s, 1e-10)?;
    dual_norm_q_with_init(h, mask, s, q, &riesz, opts)
}

/// Same ascent as [`dual_norm_q`] but from a caller-supplied starting field
/// (masked implicitly). Useful for multi-start searches.
pub fn dual_norm_q_with_init(
    h: &GridFunction,
    mask: &DomainMask,
    s: f64,
    q: f64,
    init: &GridFunction,
    opts: &DualNormOptions,
) -> Result<DualNormResult> {
    if !(q.is_finite() && q > 1.0 && q < 2.0) {
        return Err(Error::invalid(
            "q",
            format!("must lie in (1, 2), got {q}"),
        ));
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {}", opts.tol),
        ));
    }
    if opts.max_iter < 10 {
        return Err(Error::invalid("max_iter", "must be at least 10"));
    }
    let grid = mask.grid();
    grid.ensure_same(&h.grid(), "dual norm input")?;
    let params = NormParams::new(s, q)?;
    let qp = params.conjugate();

    let pairing = |phi: &GridFunction| -> Result<f64> { h.inner(phi) };
    let ball_norm = |phi: &GridFunction| -> Result<f64> { lp_norm(&frac_laplacian(phi, s)?, qp) };

    // a deterministic admissible witness for degenerate inputs
    let unit_witness = || -> Result<GridFunction> {
        let ones = GridFunction::new(grid, vec![1.0; grid.node_count()])?;
        let w = mask.apply(&ones)?;
        let nw = ball_norm(&w)?;
        w.scale(1.0 / nw)
    };

    let direction = mask.apply(h)?;
    let dir_norm = ball_norm(&direction)?;
    if dir_norm == 0.0 {
        // h annihilates every masked field
        return Ok(DualNormResult {
            value: 0.0,
            maximizer: unit_witness()?,
            iterations: 0,
            certificate_gap: 0.0,
            certified: true,
        });
    }
    let direction = direction.scale(1.0 / dir_norm)?;

    let start = mask.apply(init)?;
    let start_norm = ball_norm(&start)?;
    let mut phi = if start_norm > 0.0 {
        start.scale(1.0 / start_norm)?
    } else {
        direction.clone()
    };
    // ascent is sign-agnostic up to flipping the start
    if pairing(&phi)? < 0.0 {
        phi = phi.scale(-1.0)?;
    }

    let mut best_value = pairing(&phi)?;
    let mut history = vec![best_value];
    let mut beta = 0.5f64;
    let mut iterations = 0;
    let mut certificate_gap = f64::INFINITY;
    let mut certified = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let candidate = phi.add_scaled(beta, &direction)?;
        let norm = ball_norm(&candidate)?;
        let candidate = if norm > 1.0 {
            candidate.scale(1.0 / norm)?
        } else {
            candidate
        };
        let value = pairing(&candidate)?;
        if value > best_value {
            best_value = value;
            phi = candidate;
            beta = (beta * 1.2).min(8.0);
        } else {
            beta *= 0.5;
        }
        history.push(best_value);

        if history.len() > 10 {
            let past = history[history.len() - 11];
            certificate_gap = (best_value - past).abs() / best_value.abs().max(f64::MIN_POSITIVE);
            if certificate_gap <= opts.tol {
                certified = true;
                break;
            }
        }
    }

    // land exactly on the unit sphere
    let norm = ball_norm(&phi)?;
    let maximizer = if norm > 0.0 {
        phi.scale(1.0 / norm)?
    } else {
        unit_witness()?
    };
    let value = pairing(&maximizer)?;
    Ok(DualNormResult {
        value: value.max(best_value),
        maximizer,
        iterations,
        certificate_gap,
        certified,
    })
}
