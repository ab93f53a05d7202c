//! Ready-made fields: smooth bumps, lattice cosines and seeded noise.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// C-infinity bump exp(1 - 1/(1 - r^2)) with r^2 = sum ((x_d - c_d)/w_d)^2;
/// equals `amplitude` at the center and vanishes for r >= 1.
pub fn smooth_bump(
    grid: Grid,
    center: &[f64],
    width: &[f64],
    amplitude: f64,
) -> Result<GridFunction> {
    if center.len() != grid.dim() || width.len() != grid.dim() {
        return Err(Error::invalid(
            "center",
            format!("center/width must have {} components", grid.dim()),
        ));
    }
    if width.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
        return Err(Error::invalid("width", "components must be positive"));
    }
    if !amplitude.is_finite() {
        return Err(Error::invalid("amplitude", "must be finite"));
    }
    GridFunction::from_fn(grid, |x| {
        let r2: f64 = x
            .iter()
            .zip(center.iter().zip(width))
            .map(|(&c, (&ctr, &w))| {
                let t = (c - ctr) / w;
                t * t
            })
            .sum();
        if r2 < 1.0 {
            amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
}

/// Product of per-axis lattice cosines cos(k_d pi x_d / L); exactly periodic
/// for integer k_d.
pub fn lattice_cosine(grid: Grid, wavenumbers: &[i64], amplitude: f64) -> Result<GridFunction> {
    if wavenumbers.len() != grid.dim() {
        return Err(Error::invalid(
            "wavenumbers",
            format!("must have {} components", grid.dim()),
        ));
    }
    let scale = std::f64::consts::PI / grid.half_width();
    GridFunction::from_fn(grid, |x| {
        amplitude
            * x.iter()
                .zip(wavenumbers)
                .map(|(&c, &k)| (scale * k as f64 * c).cos())
                .product::<f64>()
    })
}

/// Uniform iid values in [-amplitude, amplitude], reproducible from the seed.
pub fn random_field(grid: Grid, seed: u64, amplitude: f64) -> Result<GridFunction> {
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::invalid("amplitude", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.node_count())
        .map(|_| rng.gen_range(-amplitude..amplitude))
        .collect();
    GridFunction::new(grid, values)
}
