//! Fourier-multiplier operators on periodic grids.
//!
//! Every operator here is diagonal in the discrete Fourier basis: transform,
//! multiply by a real symmetric symbol sampled on the frequency lattice,
//! transform back. The Nyquist row carries its own (real) symbol value and
//! the zero mode is either preserved or annihilated depending on the symbol.
//!
//! Fields can be shared between threads freely; the transform plan cache is
//! internally synchronized.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, MAX_DIM};

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let direction = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(len, direction)
        })
        .clone()
}

fn transform_in_place(grid: Grid, data: &mut [Complex<f64>], forward: bool) {
    let m = grid.points_per_dim();
    let fft = plan(m, forward);
    match grid.dim() {
        1 => fft.process(data),
        _ => {
            // rows
            for row in data.chunks_exact_mut(m) {
                fft.process(row);
            }
            // columns via gather/scatter
            let mut col = vec![Complex::default(); m];
            for j in 0..m {
                for i in 0..m {
                    col[i] = data[i * m + j];
                }
                fft.process(&mut col);
                for i in 0..m {
                    data[i * m + j] = col[i];
                }
            }
        }
    }
}

/// Forward DFT of a real field, in lattice index order. Test oracles read
/// raw spectra through this; the library itself always round-trips.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn forward(f: &GridFunction) -> Vec<Complex<f64>> {
    let mut data: Vec<Complex<f64>> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform_in_place(f.grid(), &mut data, true);
    data
}

/// Inverse DFT back to a real field; the imaginary residue left by rounding
/// is discarded.
pub(crate) fn inverse(grid: Grid, mut spectrum: Vec<Complex<f64>>) -> Result<GridFunction> {
    transform_in_place(grid, &mut spectrum, false);
    let scale = 1.0 / grid.node_count() as f64;
    let mut residue = 0.0f64;
    let values: Vec<f64> = spectrum
        .iter()
        .map(|c| {
            residue = residue.max((c.im * scale).abs());
            c.re * scale
        })
        .collect();
    let magnitude = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    debug_assert!(
        residue <= 1e-10 * (1.0 + magnitude),
        "imaginary residue {residue:e} too large for field of magnitude {magnitude:e}"
    );
    GridFunction::new(grid, values)
}

/// What a multiplier does to the zero frequency, where homogeneous symbols
/// like |xi|^s or |xi|^{-s} have no natural value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModePolicy {
    /// Keep the mean: the symbol's own value at xi = 0 is used.
    Preserve,
    /// Project the mean away: the zero-mode coefficient is set to 0.
    Annihilate,
}

/// Real nonnegative Fourier symbol m(xi) together with its zero-mode rule.
#[derive(Clone)]
pub struct MultiplierSymbol {
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    zero_mode: ZeroModePolicy,
}

impl std::fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("zero_mode", &self.zero_mode)
            .finish_non_exhaustive()
    }
}

impl MultiplierSymbol {
    pub fn new(
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        zero_mode: ZeroModePolicy,
    ) -> Self {
        MultiplierSymbol {
            eval: Arc::new(eval),
            zero_mode,
        }
    }

    pub fn identity() -> Self {
        MultiplierSymbol::new(|_| 1.0, ZeroModePolicy::Preserve)
    }

    /// |xi|^s with the zero mode annihilated; s in (0, 2] is the fractional
    /// Laplacian of order s, negative exponents give Riesz potentials.
    pub fn power(s: f64) -> Self {
        MultiplierSymbol::new(
            move |xi| {
                let norm = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
                norm.powf(s)
            },
            ZeroModePolicy::Annihilate,
        )
    }

    /// 1 / (1 + |xi|^s), the resolvent-type smoother; fixes constants.
    pub fn bessel_inverse(s: f64) -> Self {
        MultiplierSymbol::new(
            move |xi| {
                let norm = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
                1.0 / (1.0 + norm.powf(s))
            },
            ZeroModePolicy::Preserve,
        )
    }

    /// exp(-delta^2 |xi|^2), a Gaussian mollifier of width delta.
    pub fn gaussian(delta: f64) -> Self {
        MultiplierSymbol::new(
            move |xi| {
                let sq = xi.iter().map(|c| c * c).sum::<f64>();
                (-delta * delta * sq).exp()
            },
            ZeroModePolicy::Preserve,
        )
    }

    pub fn zero_mode(&self) -> ZeroModePolicy {
        self.zero_mode
    }

    /// Sample the symbol on a grid's frequency lattice, checking finiteness,
    /// nonnegativity and evenness as it goes.
    pub fn table(&self, grid: Grid) -> Result<Vec<f64>> {
        let n = grid.node_count();
        let mut table = vec![0.0f64; n];
        let zero = [0.0f64; MAX_DIM];
        for (idx, slot) in table.iter_mut().enumerate() {
            let xi = grid.frequency(idx);
            let is_zero_mode = xi[..grid.dim()].iter().all(|&c| c == 0.0);
            let value = if is_zero_mode {
                match self.zero_mode {
                    ZeroModePolicy::Annihilate => 0.0,
                    ZeroModePolicy::Preserve => (self.eval)(&zero[..grid.dim()]),
                }
            } else {
                (self.eval)(&xi[..grid.dim()])
            };
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    context: "multiplier symbol on the frequency lattice",
                });
            }
            if value < 0.0 {
                return Err(Error::invalid(
                    "symbol",
                    format!("negative value {value} at frequency {:?}", &xi[..grid.dim()]),
                ));
            }
            *slot = value;
        }
        // evenness m(xi) = m(-xi); Nyquist rows have no partner and are
        // real on their own.
        for idx in 0..n {
            if let Some(neg) = grid.negated_frequency_index(idx) {
                let a = table[idx];
                let b = table[neg];
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::invalid(
                        "symbol",
                        format!(
                            "not even: m = {a} vs {b} at +/- frequency {:?}",
                            &grid.frequency(idx)[..grid.dim()]
                        ),
                    ));
                }
            }
        }
        Ok(table)
    }
}

/// Apply a Fourier multiplier to a field: inverse(m * forward(f)).
pub fn apply_multiplier(f: &GridFunction, symbol: &MultiplierSymbol) -> Result<GridFunction> {
    let table = symbol.table(f.grid())?;
    apply_with_table(f, &table)
}

/// Apply a pre-sampled symbol table. The table must come from
/// [`MultiplierSymbol::table`] on the same grid.
pub(crate) fn apply_with_table(f: &GridFunction, table: &[f64]) -> Result<GridFunction> {
    let values = apply_table_vec(f.grid(), f.values(), table);
    GridFunction::new(f.grid(), values)
}

/// Raw-slice variant of [`apply_with_table`] for solver inner loops.
pub(crate) fn apply_table_vec(grid: Grid, values: &[f64], table: &[f64]) -> Vec<f64> {
    let mut data: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform_in_place(grid, &mut data, true);
    for (c, &m) in data.iter_mut().zip(table) {
        *c *= m;
    }
    transform_in_place(grid, &mut data, false);
    let scale = 1.0 / grid.node_count() as f64;
    data.iter().map(|c| c.re * scale).collect()
}

fn validate_order(name: &'static str, s: f64, lo: f64, hi: f64, hi_inclusive: bool) -> Result<()> {
    let ok = s.is_finite() && s > lo && (s < hi || (hi_inclusive && s == hi));
    if ok {
        Ok(())
    } else {
        let bracket = if hi_inclusive { "]" } else { ")" };
        Err(Error::invalid(
            name,
            format!("must lie in ({lo}, {hi}{bracket}, got {s}"),
        ))
    }
}

/// Fractional Laplacian of order s in (0, 2]: symbol |xi|^s, mean removed.
pub fn frac_laplacian(f: &GridFunction, s: f64) -> Result<GridFunction> {
    validate_order("s", s, 0.0, 2.0, true)?;
    apply_multiplier(f, &MultiplierSymbol::power(s))
}

/// Riesz potential of order s in (0, N): symbol |xi|^{-s}, mean removed.
///
/// Inverts [`frac_laplacian`] on mean-zero fields.
pub fn riesz_potential(f: &GridFunction, s: f64) -> Result<GridFunction> {
    let n = f.grid().dim() as f64;
    validate_order("s", s, 0.0, n, false)?;
    apply_multiplier(f, &MultiplierSymbol::power(-s))
}

/// Resolvent-type smoother with symbol 1/(1 + |xi|^s), s in (0, 2).
///
/// Splits any field into a smooth part and its fractional Laplacian:
/// f = frac_laplacian(bessel_inverse(f, s), s) + bessel_inverse(f, s).
pub fn bessel_inverse(f: &GridFunction, s: f64) -> Result<GridFunction> {
    validate_order("s", s, 0.0, 2.0, false)?;
    apply_multiplier(f, &MultiplierSymbol::bessel_inverse(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    pub(crate) fn random_field(grid: Grid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.node_count())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        GridFunction::new(grid, values).unwrap()
    }

    fn weighted_l2(f: &GridFunction) -> f64 {
        f.inner(f).unwrap().sqrt()
    }

    #[test]
    fn cosine_is_an_eigenfunction() {
        // L = pi makes the lattice frequencies integers; cos(2x) has |xi| = 2.
        let grid = Grid::new(1, PI, 64).unwrap();
        let f = GridFunction::from_fn(grid, |x| (2.0 * x[0]).cos()).unwrap();
        let lf = frac_laplacian(&f, 1.0).unwrap();
        for (got, want) in lf.values().iter().zip(f.values()) {
            assert!((got - 2.0 * want).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dim_cosine_eigenfunction() {
        let grid = Grid::new(2, PI, 16).unwrap();
        let f = GridFunction::from_fn(grid, |x| x[0].cos() * x[1].cos()).unwrap();
        let lf = frac_laplacian(&f, 1.0).unwrap();
        let lambda = 2.0f64.sqrt();
        for (got, want) in lf.values().iter().zip(f.values()) {
            assert!((got - lambda * want).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_are_annihilated() {
        let grid = Grid::new(1, 1.0, 32).unwrap();
        let c = GridFunction::new(grid, vec![5.0; 32]).unwrap();
        let lc = frac_laplacian(&c, 0.7).unwrap();
        assert!(lc.max_abs() < 1e-13);
    }

    #[test]
    fn bessel_fixes_constants_and_decomposes() {
        let grid = Grid::new(1, 1.0, 64).unwrap();
        let c = GridFunction::new(grid, vec![3.0; 64]).unwrap();
        let bc = bessel_inverse(&c, 1.2).unwrap();
        for &v in bc.values() {
            assert!((v - 3.0).abs() < 1e-13);
        }
        // f = laps{s}(B_s f) + B_s f for arbitrary f
        for seed in 0..5 {
            let f = random_field(grid, seed);
            for &s in &[0.4, 1.0, 1.6] {
                let bf = bessel_inverse(&f, s).unwrap();
                let recomposed = frac_laplacian(&bf, s).unwrap().add(&bf).unwrap();
                let err = recomposed.sub(&f).unwrap().max_abs();
                assert!(err < 1e-11, "s={s} seed={seed}: residual {err:e}");
            }
        }
    }

    #[test]
    fn riesz_inverts_on_mean_zero() {
        let grid = Grid::new(1, 2.0, 64).unwrap();
        for seed in 0..5 {
            let f = random_field(grid, seed);
            let f0 = f.map(|v| v).unwrap();
            let mean = f0.mean();
            let f0 = f0.map(|v| v - mean).unwrap();
            for &s in &[0.3, 0.5, 0.9] {
                let roundtrip = frac_laplacian(&riesz_potential(&f0, s).unwrap(), s).unwrap();
                let err = roundtrip.sub(&f0).unwrap().max_abs();
                assert!(err < 1e-10, "s={s}: residual {err:e}");
            }
        }
        // general f: round trip removes the mean
        let f = random_field(grid, 99);
        let mean = f.mean();
        let rt = frac_laplacian(&riesz_potential(&f, 0.5).unwrap(), 0.5).unwrap();
        let centered = f.map(|v| v - mean).unwrap();
        assert!(rt.sub(&centered).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn semigroup_property_on_mean_zero() {
        let grid = Grid::new(1, 1.0, 64).unwrap();
        for seed in 0..5 {
            let f = random_field(grid, seed);
            for &(s, t) in &[(0.5, 0.5), (0.3, 0.9), (0.8, 1.2)] {
                let two_step = frac_laplacian(&frac_laplacian(&f, s).unwrap(), t).unwrap();
                let one_step = frac_laplacian(&f, s + t).unwrap();
                let err = two_step.sub(&one_step).unwrap().max_abs();
                let scale = one_step.max_abs().max(1.0);
                assert!(err < 1e-10 * scale, "s={s} t={t}: residual {err:e}");
            }
        }
    }

    #[test]
    fn operators_are_self_adjoint() {
        let grid = Grid::new(1, 1.5, 64).unwrap();
        for seed in 0..10 {
            let f = random_field(grid, 2 * seed);
            let g = random_field(grid, 2 * seed + 1);
            let lf = frac_laplacian(&f, 0.8).unwrap();
            let lg = frac_laplacian(&g, 0.8).unwrap();
            let lhs = lf.inner(&g).unwrap();
            let rhs = f.inner(&lg).unwrap();
            let scale = weighted_l2(&f) * weighted_l2(&g);
            assert!((lhs - rhs).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn parseval_identity() {
        // independent check of the transform normalization
        let grid = Grid::new(1, 2.0, 64).unwrap();
        let f = random_field(grid, 7);
        let spectrum = forward(&f);
        let freq_side = (grid.cell_volume() / grid.node_count() as f64
            * spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>())
        .sqrt();
        let phys_side = weighted_l2(&f);
        assert!((freq_side - phys_side).abs() < 1e-12 * phys_side);
    }

    #[test]
    fn order_validation() {
        let grid = Grid::new(1, 1.0, 16).unwrap();
        let f = random_field(grid, 0);
        assert!(frac_laplacian(&f, 0.0).is_err());
        assert!(frac_laplacian(&f, 2.0).is_ok());
        assert!(frac_laplacian(&f, 2.1).is_err());
        assert!(frac_laplacian(&f, f64::NAN).is_err());
        assert!(riesz_potential(&f, 1.0).is_err()); // needs s < N = 1
        assert!(riesz_potential(&f, 0.99).is_ok());
        assert!(bessel_inverse(&f, 2.0).is_err());
        let grid2 = Grid::new(2, 1.0, 16).unwrap();
        let f2 = random_field(grid2, 0);
        assert!(riesz_potential(&f2, 1.5).is_ok());
    }

    #[test]
    fn asymmetric_or_negative_symbols_are_rejected() {
        let grid = Grid::new(1, 1.0, 16).unwrap();
        let f = random_field(grid, 1);
        let odd = MultiplierSymbol::new(|xi| xi[0], ZeroModePolicy::Annihilate);
        assert!(apply_multiplier(&f, &odd).is_err());
        let negative = MultiplierSymbol::new(|_| -1.0, ZeroModePolicy::Preserve);
        assert!(apply_multiplier(&f, &negative).is_err());
        let singular = MultiplierSymbol::new(
            |xi| 1.0 / xi.iter().map(|c| c * c).sum::<f64>(),
            ZeroModePolicy::Preserve,
        );
        assert!(apply_multiplier(&f, &singular).is_err());
    }

    #[test]
    fn gaussian_smoother_contracts_high_frequencies() {
        let grid = Grid::new(1, PI, 64).unwrap();
        let f = GridFunction::from_fn(grid, |x| (8.0 * x[0]).cos()).unwrap();
        let smoothed = apply_multiplier(&f, &MultiplierSymbol::gaussian(0.5)).unwrap();
        let expected = (-0.25f64 * 64.0).exp();
        for (got, want) in smoothed.values().iter().zip(f.values()) {
            assert!((got - expected * want).abs() < 1e-12);
        }
    }
}
