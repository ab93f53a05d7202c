//! Discrete Lebesgue and fractional Sobolev norms, and the sharp Poincare
//! constant of a masked domain.

use crate::error::{Error, Result};
use crate::grid::{DomainMask, GridFunction};
use crate::spectral::frac_laplacian;
use crate::vi::solve_unconstrained;

/// Order/integrability pair (s, p) with s in (0, 1] and p in (1, inf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams {
    s: f64,
    p: f64,
}

impl NormParams {
    pub fn new(s: f64, p: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0 && s <= 1.0) {
            return Err(Error::invalid("s", format!("must lie in (0, 1], got {s}")));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::invalid(
                "p",
                format!("must lie in (1, inf), got {p}"),
            ));
        }
        Ok(NormParams { s, p })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent p' with 1/p + 1/p' = 1.
    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// Discrete L^p norm (spacing^N * sum |f_i|^p)^{1/p}, p >= 1.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(
            "p",
            format!("must lie in [1, inf), got {p}"),
        ));
    }
    Ok(lp_power_sum(f, p).powf(1.0 / p))
}

/// spacing^N * sum |f_i|^p, the p-th power of the L^p norm.
fn lp_power_sum(f: &GridFunction, p: f64) -> f64 {
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    f.grid().cell_volume() * sum
}

/// Seminorm |f|_{s,p} = || laps{s} f ||_{L^p}.
pub fn hsp_seminorm(f: &GridFunction, params: NormParams) -> Result<f64> {
    lp_norm(&frac_laplacian(f, params.s)?, params.p)
}

/// Sharp constant C in ||f||_{L^2} <= C |f|_{s,2} over fields vanishing
/// outside Omega.
///
/// C = 1/sqrt(lambda_min) where lambda_min is the smallest eigenvalue of the
/// order-2s operator restricted to masked fields, found by inverse power
/// iteration on the masked Galerkin solver.
pub fn poincare_constant(mask: &DomainMask, s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0 && s <= 1.0) {
        return Err(Error::invalid("s", format!("must lie in (0, 1], got {s}")));
    }
    const REL_TOL: f64 = 1e-8;
    const MAX_ITER: usize = 10_000;
    const INNER_TOL: f64 = 1e-12;

    let grid = mask.grid();
    let ones = GridFunction::new(grid, vec![1.0; grid.node_count()])?;
    let mut v = mask.apply(&ones)?;
    let norm = v.inner(&v)?.sqrt();
    v = v.scale(1.0 / norm)?;

    let mut lambda_prev: Option<f64> = None;
    for iteration in 0..MAX_ITER {
        let w = solve_unconstrained(&v, mask, s, INNER_TOL)?;
        // A w = P v, so the Rayleigh quotient of w is <v, w> / <w, w>.
        let vw = v.inner(&w)?;
        let ww = w.inner(&w)?;
        if !(ww > 0.0) {
            return Err(Error::NoConvergence {
                solver: "inverse power iteration",
                iterations: iteration,
                residual: f64::NAN,
            });
        }
        let lambda = vw / ww;
        if let Some(prev) = lambda_prev {
            if (lambda - prev).abs() <= REL_TOL * lambda.abs() {
                return Ok(1.0 / lambda.sqrt());
            }
        }
        lambda_prev = Some(lambda);
        v = w.scale(1.0 / ww.sqrt())?;
    }
    Err(Error::NoConvergence {
        solver: "inverse power iteration",
        iterations: MAX_ITER,
        residual: lambda_prev.unwrap_or(f64::NAN),
    })
}

/// The two sides (||laps{s} phi||_q, ||laps{s} phi||_p) of the finite-measure
/// embedding for q < p; phi must vanish outside Omega.
pub fn holder_type_check(
    phi: &GridFunction,
    mask: &DomainMask,
    s: f64,
    q: f64,
    p: f64,
) -> Result<(f64, f64)> {
    if !(q.is_finite() && p.is_finite() && q > 1.0 && q < p) {
        return Err(Error::invalid(
            "q",
            format!("need 1 < q < p, got q = {q}, p = {p}"),
        ));
    }
    if !mask.is_masked(phi) {
        return Err(Error::invalid(
            "phi",
            "must vanish at every node outside the domain",
        ));
    }
    let image = frac_laplacian(phi, s)?;
    Ok((lp_norm(&image, q)?, lp_norm(&image, p)?))
}

/// Defects d_k = | ||f_k||_p^p - ||f||_p^p - ||f_k - f||_p^p | of an
/// approximating sequence.
pub fn brezis_lieb_defect(seq: &[GridFunction], f: &GridFunction, p: f64) -> Result<Vec<f64>> {
    if seq.is_empty() {
        return Err(Error::invalid("seq", "sequence must be nonempty"));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::invalid(
            "p",
            format!("must lie in [1, inf), got {p}"),
        ));
    }
    let limit_power = lp_power_sum(f, p);
    seq.iter()
        .map(|fk| {
            let diff = fk.sub(f)?;
            Ok((lp_power_sum(fk, p) - limit_power - lp_power_sum(&diff, p)).abs())
        })
        .collect()
}
