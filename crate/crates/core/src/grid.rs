//! Uniform periodic grids on the box [-L, L)^N and fields living on them.
//!
//! Nodes are x_i = -L + i*spacing with spacing = 2L/M, flattened row-major
//! for N = 2. The frequency lattice attached to a grid is xi_k = (pi/L) * k
//! with integer k in [-M/2, M/2) per axis, in standard DFT index order.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 2;

/// Uniform periodic grid: `dim` in {1, 2}, half width L, M nodes per axis.
///
/// M must be a power of two and at least 8 so every transform is exact-radix
/// and the frequency lattice is symmetric apart from the Nyquist row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points_per_dim: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points_per_dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::invalid("dim", format!("must be 1 or 2, got {dim}")));
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::invalid(
                "half_width",
                format!("must be positive and finite, got {half_width}"),
            ));
        }
        let m = points_per_dim;
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::invalid(
                "points_per_dim",
                format!("must be a power of two >= 8, got {m}"),
            ));
        }
        Ok(Grid {
            dim,
            half_width,
            points_per_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    /// Total number of nodes, M^N.
    pub fn node_count(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    /// Mesh width 2L/M, exact in floating point for power-of-two M.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_dim as f64
    }

    /// Quadrature weight of one node, spacing^N.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Per-axis indices of a flattened node index.
    pub fn axis_indices(&self, idx: usize) -> [usize; MAX_DIM] {
        debug_assert!(idx < self.node_count());
        let m = self.points_per_dim;
        match self.dim {
            1 => [idx, 0],
            _ => [idx / m, idx % m],
        }
    }

    /// Physical coordinates of a node; trailing entries are 0 for dim 1.
    pub fn node(&self, idx: usize) -> [f64; MAX_DIM] {
        let ij = self.axis_indices(idx);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.dim {
            x[d] = -self.half_width + ij[d] as f64 * h;
        }
        x
    }

    /// Signed integer frequency index along one axis in [-M/2, M/2).
    pub fn axis_wavenumber(&self, i: usize) -> i64 {
        let m = self.points_per_dim as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// Frequency vector xi_k = (pi/L) * k of a flattened lattice index.
    pub fn frequency(&self, idx: usize) -> [f64; MAX_DIM] {
        let ij = self.axis_indices(idx);
        let scale = std::f64::consts::PI / self.half_width;
        let mut xi = [0.0; MAX_DIM];
        for d in 0..self.dim {
            xi[d] = scale * self.axis_wavenumber(ij[d]) as f64;
        }
        xi
    }

    /// Flattened index of the frequency -k, or None when any axis sits on the
    /// Nyquist row (which has no positive partner on the lattice).
    pub fn negated_frequency_index(&self, idx: usize) -> Option<usize> {
        let m = self.points_per_dim;
        let ij = self.axis_indices(idx);
        let mut out = [0usize; MAX_DIM];
        for d in 0..self.dim {
            if ij[d] == m / 2 {
                return None;
            }
            out[d] = if ij[d] == 0 { 0 } else { m - ij[d] };
        }
        Some(match self.dim {
            1 => out[0],
            _ => out[0] * m + out[1],
        })
    }

    /// Largest |xi| on the lattice: (pi M / 2L) * sqrt(N), attained at the
    /// Nyquist corner.
    pub fn max_frequency_norm(&self) -> f64 {
        let per_axis = std::f64::consts::PI * self.points_per_dim as f64 / (2.0 * self.half_width);
        per_axis * (self.dim as f64).sqrt()
    }

    pub(crate) fn ensure_same(&self, other: &Grid, context: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch { context })
        }
    }
}

/// Real scalar field sampled at the nodes of a [`Grid`].
///
/// All values are finite by construction; every operation that could break
/// that revalidates its output.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::invalid(
                "values",
                format!(
                    "length {} does not match node count {}",
                    values.len(),
                    grid.node_count()
                ),
            ));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "grid function values",
            });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.node_count()],
        }
    }

    /// Sample a closure at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.node_count())
            .map(|i| f(&grid.node(i)[..grid.dim()]))
            .collect();
        GridFunction::new(grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Apply a finite map pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        GridFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Combine two fields on the same grid pointwise.
    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "pointwise combination")?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GridFunction::new(self.grid, values)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    /// a + c * b.
    pub fn add_scaled(&self, c: f64, other: &GridFunction) -> Result<Self> {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Mean value over all nodes.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Quadrature inner product spacing^N * sum f g.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid, "inner product")?;
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .sum();
        Ok(self.grid.cell_volume() * dot)
    }
}

/// Indicator of the open computational domain Omega inside the periodic box.
///
/// Omega must be a strict, nonempty subset of the nodes and must stay inside
/// the central sub-box [-L/2, L/2]^N so that periodic images remain separated
/// from the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
    inside_indices: Vec<usize>,
}

impl DomainMask {
    pub fn from_predicate(grid: Grid, pred: impl Fn(&[f64]) -> bool) -> Result<Self> {
        let mut inside = vec![false; grid.node_count()];
        let mut inside_indices = Vec::new();
        let margin = grid.half_width() / 2.0;
        for (i, flag) in inside.iter_mut().enumerate() {
            let x = grid.node(i);
            if pred(&x[..grid.dim()]) {
                for &c in &x[..grid.dim()] {
                    if c < -margin || c > margin {
                        return Err(Error::invalid(
                            "mask",
                            format!(
                                "node at {:?} lies outside the central sub-box [{:.3}, {:.3}]",
                                &x[..grid.dim()],
                                -margin,
                                margin
                            ),
                        ));
                    }
                }
                *flag = true;
                inside_indices.push(i);
            }
        }
        if inside_indices.is_empty() {
            return Err(Error::invalid("mask", "no node lies inside the domain"));
        }
        if inside_indices.len() == grid.node_count() {
            return Err(Error::invalid(
                "mask",
                "domain covers every node; the complement must be nonempty",
            ));
        }
        Ok(DomainMask {
            grid,
            inside,
            inside_indices,
        })
    }

    /// Axis-aligned open box: node is inside iff lo_d < x_d < hi_d for all axes.
    pub fn from_bounds(grid: Grid, bounds: &[[f64; 2]]) -> Result<Self> {
        if bounds.len() != grid.dim() {
            return Err(Error::invalid(
                "bounds",
                format!("expected {} intervals, got {}", grid.dim(), bounds.len()),
            ));
        }
        for b in bounds {
            if !(b[0].is_finite() && b[1].is_finite() && b[0] < b[1]) {
                return Err(Error::invalid(
                    "bounds",
                    format!("invalid interval [{}, {}]", b[0], b[1]),
                ));
            }
        }
        DomainMask::from_predicate(grid, |x| {
            x.iter()
                .zip(bounds)
                .all(|(&c, b)| c > b[0] && c < b[1])
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn inside_indices(&self) -> &[usize] {
        &self.inside_indices
    }

    pub fn inside_count(&self) -> usize {
        self.inside_indices.len()
    }

    /// Zero a field outside Omega.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(&f.grid(), "mask application")?;
        let values = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if self.inside[i] { v } else { 0.0 })
            .collect();
        GridFunction::new(self.grid, values)
    }

    /// True when the field vanishes identically outside Omega.
    pub fn is_masked(&self, f: &GridFunction) -> bool {
        f.grid() == self.grid
            && f.values()
                .iter()
                .enumerate()
                .all(|(i, &v)| self.inside[i] || v == 0.0)
    }
}
