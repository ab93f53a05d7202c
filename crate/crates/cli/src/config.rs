//! JSON run configurations and their translation into toolkit objects.
//!
//! Unknown fields are rejected so a typo cannot silently fall back to a
//! default. Every config carries its own seed and output path; command-line
//! flags override both, and the hash that ends up in the output file is
//! taken over the effective, post-override document.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fracspace::dual::DualNormOptions;
use fracspace::fields::{lattice_cosine, random_field, smooth_bump};
use fracspace::grid::{DomainMask, Grid, GridFunction};
use fracspace::vi::VISolveOptions;
use fracspace::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.half_width, self.points)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskConfig {
    pub bounds: Vec<[f64; 2]>,
}

impl MaskConfig {
    pub fn build(&self, grid: Grid) -> Result<DomainMask> {
        DomainMask::from_bounds(grid, &self.bounds)
    }
}

/// Declarative field constructions, composable by summation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Constant {
        value: f64,
    },
    Bump {
        center: Vec<f64>,
        width: Vec<f64>,
        amplitude: f64,
    },
    Cosine {
        wavenumbers: Vec<i64>,
        amplitude: f64,
    },
    Random {
        amplitude: f64,
        /// Falls back to the run seed when absent.
        seed: Option<u64>,
    },
    Sum {
        terms: Vec<FieldSpec>,
    },
}

impl FieldSpec {
    pub fn build(&self, grid: Grid, run_seed: u64) -> Result<GridFunction> {
        match self {
            FieldSpec::Zero => Ok(GridFunction::zeros(grid)),
            FieldSpec::Constant { value } => {
                GridFunction::new(grid, vec![*value; grid.node_count()])
            }
            FieldSpec::Bump {
                center,
                width,
                amplitude,
            } => smooth_bump(grid, center, width, *amplitude),
            FieldSpec::Cosine {
                wavenumbers,
                amplitude,
            } => lattice_cosine(grid, wavenumbers, *amplitude),
            FieldSpec::Random { amplitude, seed } => {
                random_field(grid, seed.unwrap_or(run_seed), *amplitude)
            }
            FieldSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::invalid("terms", "sum needs at least one term"));
                }
                let mut acc = terms[0].build(grid, run_seed)?;
                for term in &terms[1..] {
                    acc = acc.add(&term.build(grid, run_seed)?)?;
                }
                Ok(acc)
            }
        }
    }
}

fn default_vi_tol() -> f64 {
    VISolveOptions::default().tol
}

fn default_vi_max_iter() -> usize {
    VISolveOptions::default().max_iter
}

fn default_dual_tol() -> f64 {
    DualNormOptions::default().tol
}

fn default_dual_max_iter() -> usize {
    DualNormOptions::default().max_iter
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViOptsConfig {
    #[serde(default = "default_vi_tol")]
    pub tol: f64,
    #[serde(default = "default_vi_max_iter")]
    pub max_iter: usize,
}

impl Default for ViOptsConfig {
    fn default() -> Self {
        ViOptsConfig {
            tol: default_vi_tol(),
            max_iter: default_vi_max_iter(),
        }
    }
}

impl ViOptsConfig {
    pub fn build(&self) -> VISolveOptions {
        VISolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualOptsConfig {
    #[serde(default = "default_dual_tol")]
    pub tol: f64,
    #[serde(default = "default_dual_max_iter")]
    pub max_iter: usize,
}

impl Default for DualOptsConfig {
    fn default() -> Self {
        DualOptsConfig {
            tol: default_dual_tol(),
            max_iter: default_dual_max_iter(),
        }
    }
}

impl DualOptsConfig {
    pub fn build(&self) -> DualNormOptions {
        DualNormOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveViConfig {
    pub grid: GridConfig,
    pub mask: MaskConfig,
    pub s: f64,
    pub load: FieldSpec,
    pub obstacle: FieldSpec,
    #[serde(default)]
    pub vi: ViOptsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualNormConfig {
    pub grid: GridConfig,
    pub mask: MaskConfig,
    pub s: f64,
    /// 2 selects the exact Riesz route; values in (1, 2) run the ascent.
    pub q: f64,
    pub source: FieldSpec,
    #[serde(default)]
    pub dual: DualOptsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: GridConfig,
    pub mask: MaskConfig,
    pub s: f64,
    pub load: FieldSpec,
    pub base_obstacle: FieldSpec,
    pub envelope: FieldSpec,
    pub amplitude: f64,
    /// Defaults to s.
    #[serde(default)]
    pub decay_exponent: Option<f64>,
    #[serde(default = "default_stride")]
    pub stride: usize,
    pub count: usize,
    /// Exponent for obstacle seminorms in the Mosco sweep; must exceed 2.
    #[serde(default = "default_obstacle_q")]
    pub obstacle_q: f64,
    /// Dual distance exponent in (1, 2).
    #[serde(default = "default_dual_q")]
    pub dual_q: f64,
    #[serde(default)]
    pub vi: ViOptsConfig,
    #[serde(default)]
    pub dual: DualOptsConfig,
    #[serde(default)]
    pub mollifier_width: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

fn default_stride() -> usize {
    1
}

fn default_obstacle_q() -> f64 {
    3.0
}

fn default_dual_q() -> f64 {
    1.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub grid: GridConfig,
    pub mask: MaskConfig,
    pub s: f64,
    pub envelope: FieldSpec,
    pub n_max: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_dual_q")]
    pub q: f64,
    #[serde(default)]
    pub dual: DualOptsConfig,
    #[serde(default)]
    pub mollifier_width: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QviConfig {
    pub grid: GridConfig,
    pub mask: MaskConfig,
    pub s: f64,
    pub load: FieldSpec,
    pub mollifier_width: f64,
    pub shift: f64,
    pub envelope: FieldSpec,
    #[serde(default = "default_outer_tol")]
    pub outer_tol: f64,
    #[serde(default = "default_outer_max")]
    pub outer_max: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default)]
    pub inner: ViOptsConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<String>,
}

fn default_outer_tol() -> f64 {
    1e-8
}

fn default_outer_max() -> usize {
    200
}

fn default_damping() -> f64 {
    1.0
}

/// Parse a config document, rejecting unknown fields with the serde path.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid("config", e.to_string()))
}

/// Hex SHA-256 of the effective config's canonical serialization.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
