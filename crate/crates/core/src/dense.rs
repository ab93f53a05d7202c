//! Dense circulant representation of the spectral operators.
//!
//! The matrix route costs O(n^2) per application and exists as an
//! independently checkable counterpart of the O(n log n) transform route,
//! and as the ingredient of the kernel-based product rule.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::spectral::{inverse, MultiplierSymbol};
use rustfft::num_complex::Complex;

/// Node budget for dense matrices.
pub const DENSE_NODE_LIMIT: usize = 4096;

/// Explicit (block-)circulant matrix of a Fourier multiplier on a grid.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    grid: Grid,
    entries: Vec<f64>,
}

impl DenseOperator {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.node_count()
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.size();
        &self.entries[row * n..(row + 1) * n]
    }

    /// Matrix-vector product, O(n^2).
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid
            .ensure_same(&f.grid(), "dense operator application")?;
        let n = self.size();
        let x = f.values();
        let values = (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(x)
                    .map(|(&k, &v)| k * v)
                    .sum()
            })
            .collect();
        GridFunction::new(self.grid, values)
    }
}

fn circulant_from_symbol(grid: Grid, symbol: &MultiplierSymbol) -> Result<DenseOperator> {
    let n = grid.node_count();
    if n > DENSE_NODE_LIMIT {
        return Err(Error::DenseTooLarge {
            nodes: n,
            limit: DENSE_NODE_LIMIT,
        });
    }
    // The convolution stencil is the inverse transform of the symbol table.
    let table = symbol.table(grid)?;
    let spectrum: Vec<Complex<f64>> = table.iter().map(|&m| Complex::new(m, 0.0)).collect();
    let stencil = inverse(grid, spectrum)?;
    let g = stencil.values();

    let m = grid.points_per_dim();
    let mut entries = vec![0.0f64; n * n];
    match grid.dim() {
        1 => {
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] = g[(i + n - j) % n];
                }
            }
        }
        _ => {
            for i in 0..n {
                let [ix, iy] = grid.axis_indices(i);
                for j in 0..n {
                    let [jx, jy] = grid.axis_indices(j);
                    let dx = (ix + m - jx) % m;
                    let dy = (iy + m - jy) % m;
                    entries[i * n + j] = g[dx * m + dy];
                }
            }
        }
    }
    Ok(DenseOperator { grid, entries })
}

/// Dense matrix K with K f = frac_laplacian(f, s) for every f on the grid.
pub fn kernel_matrix(grid: Grid, s: f64) -> Result<DenseOperator> {
    if !(s.is_finite() && s > 0.0 && s <= 2.0) {
        return Err(Error::invalid("s", format!("must lie in (0, 2], got {s}")));
    }
    circulant_from_symbol(grid, &MultiplierSymbol::power(s))
}

/// Remainder R in the product rule
/// laps{s}(f g) = f laps{s}g + g laps{s}f + R,
/// assembled from the off-diagonal kernel entries:
/// R(x_i) = sum_{j != i} K_ij (f_i - f_j)(g_i - g_j).
pub fn product_rule_remainder(
    f: &GridFunction,
    g: &GridFunction,
    s: f64,
) -> Result<GridFunction> {
    f.grid()
        .ensure_same(&g.grid(), "product rule remainder")?;
    let kernel = kernel_matrix(f.grid(), s)?;
    let n = kernel.size();
    let fv = f.values();
    let gv = g.values();
    let values = (0..n)
        .map(|i| {
            let row = kernel.row(i);
            let mut acc = 0.0;
            for j in 0..n {
                if j != i {
                    acc += row[j] * (fv[i] - fv[j]) * (gv[i] - gv[j]);
                }
            }
            acc
        })
        .collect();
    GridFunction::new(f.grid(), values)
}
