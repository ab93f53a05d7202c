//! Convergence experiments around obstacle problems with wobbling obstacles.
//!
//! The driver sequences share one construction: a base obstacle perturbed by
//! an amplitude-decaying, frequency-increasing lattice oscillation under a
//! smooth envelope. Solutions, dual distances and weak-convergence witnesses
//! are tabulated per index so trends can be checked downstream. Per-index
//! solves run in parallel; every random ingredient is seeded, so reports are
//! reproducible.

use rayon::prelude::*;

use crate::dual::{dual_norm_2, dual_norm_q, DualNormOptions};
use crate::error::{Error, Result};
use crate::fields::smooth_bump;
use crate::grid::{DomainMask, GridFunction};
use crate::norms::{hsp_seminorm, lp_norm, NormParams};
use crate::spectral::{apply_multiplier, frac_laplacian, MultiplierSymbol};
use crate::vi::{solve_vi, VIProblem, VISolveOptions, VISolution};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Obstacle family psi_n = base + amplitude n^{-decay} envelope cos(n stride pi x_1 / L).
#[derive(Debug, Clone)]
pub struct ObstacleSequenceSpec {
    base: GridFunction,
    mask: DomainMask,
    envelope: GridFunction,
    amplitude: f64,
    decay_exponent: f64,
    stride: usize,
    count: usize,
}

impl ObstacleSequenceSpec {
    pub fn new(
        base: GridFunction,
        mask: DomainMask,
        envelope: GridFunction,
        amplitude: f64,
        decay_exponent: f64,
        stride: usize,
        count: usize,
    ) -> Result<Self> {
        let grid = mask.grid();
        grid.ensure_same(&base.grid(), "obstacle sequence base")?;
        grid.ensure_same(&envelope.grid(), "obstacle sequence envelope")?;
        validate_envelope(&envelope, &mask)?;
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::invalid("amplitude", "must be positive"));
        }
        if !(decay_exponent.is_finite() && decay_exponent >= 0.0) {
            return Err(Error::invalid("decay_exponent", "must be nonnegative"));
        }
        if stride == 0 {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        if count == 0 {
            return Err(Error::invalid("count", "must be at least 1"));
        }
        // resolvability: highest oscillation stays under a quarter of the
        // Nyquist frequency
        let budget = grid.points_per_dim() / 8;
        if count * stride > budget {
            return Err(Error::invalid(
                "count",
                format!(
                    "count * stride = {} exceeds the resolvable budget M/8 = {budget}",
                    count * stride
                ),
            ));
        }
        Ok(ObstacleSequenceSpec {
            base,
            mask,
            envelope,
            amplitude,
            decay_exponent,
            stride,
            count,
        })
    }

    pub fn base(&self) -> &GridFunction {
        &self.base
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn stride(&self) -> usize {
        self.stride
    }
}

fn validate_envelope(envelope: &GridFunction, mask: &DomainMask) -> Result<()> {
    if !mask.is_masked(envelope) {
        return Err(Error::invalid(
            "envelope",
            "must vanish outside the domain",
        ));
    }
    if envelope
        .values()
        .iter()
        .any(|&v| !(0.0..=1.0).contains(&v))
    {
        return Err(Error::invalid("envelope", "values must lie in [0, 1]"));
    }
    Ok(())
}

/// The obstacles psi_1, ..., psi_count of the family.
pub fn make_obstacle_sequence(spec: &ObstacleSequenceSpec) -> Result<Vec<GridFunction>> {
    let grid = spec.mask.grid();
    let scale = std::f64::consts::PI / grid.half_width();
    (1..=spec.count)
        .map(|n| {
            let wobble = spec.amplitude * (n as f64).powf(-spec.decay_exponent);
            let freq = scale * (n * spec.stride) as f64;
            let mut values = spec.base.values().to_vec();
            for (i, v) in values.iter_mut().enumerate() {
                let x1 = grid.node(i)[0];
                *v += wobble * spec.envelope.values()[i] * (freq * x1).cos();
            }
            let psi = GridFunction::new(grid, values)?;
            for (i, &v) in psi.values().iter().enumerate() {
                if !spec.mask.is_inside(i) && v > 0.0 {
                    return Err(Error::Infeasible(format!(
                        "obstacle {n} of the sequence is positive outside the domain at node {i}"
                    )));
                }
            }
            Ok(psi)
        })
        .collect()
}

/// Fixed unit-L^2 smooth masked test fields for weak-convergence probes.
pub fn weak_witnesses(mask: &DomainMask, count: usize, seed: u64) -> Result<Vec<GridFunction>> {
    let grid = mask.grid();
    let dim = grid.dim();
    // bounding box of the inside nodes
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for &i in mask.inside_indices() {
        let x = grid.node(i);
        for d in 0..dim {
            lo[d] = lo[d].min(x[d]);
            hi[d] = hi[d].max(x[d]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut center = vec![0.0; dim];
        let mut width = vec![0.0; dim];
        for d in 0..dim {
            let extent = hi[d] - lo[d];
            center[d] = rng.gen_range((lo[d] + 0.25 * extent)..(hi[d] - 0.25 * extent));
            width[d] = rng.gen_range((0.15 * extent)..(0.4 * extent));
        }
        let bump = mask.apply(&smooth_bump(grid, &center, &width, 1.0)?)?;
        let norm = bump.inner(&bump)?.sqrt();
        if norm > 1e-12 {
            out.push(bump.scale(1.0 / norm)?);
        }
    }
    Ok(out)
}

/// Minimum over Omega of the Gaussian mollification of the zero-extended
/// restriction of h to Omega; a discrete reading of "h >= 0 against smooth
/// nonnegative test functions supported in Omega".
pub fn mollified_min(h: &GridFunction, mask: &DomainMask, width: f64) -> Result<(f64, f64)> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::invalid("width", "must be positive"));
    }
    let masked = mask.apply(h)?;
    let smooth = apply_multiplier(&masked, &MultiplierSymbol::gaussian(width))?;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &i in mask.inside_indices() {
        min = min.min(smooth.values()[i]);
        max = max.max(smooth.values()[i]);
    }
    Ok((min, max))
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Options shared by the sweep drivers.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub vi: VISolveOptions,
    pub dual: DualNormOptions,
    /// Exponent of the dual distance metric, in (1, 2).
    pub dual_q: f64,
    pub witness_seed: u64,
    /// Gaussian width for the nonnegativity probe; four grid spacings when
    /// None. Narrower widths leave visible spectral weight at the Nyquist
    /// frequency, so the discrete kernel rings negative and the probe would
    /// report spurious sign changes on nonnegative data.
    pub mollifier_width: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            vi: VISolveOptions::default(),
            dual: DualNormOptions::default(),
            dual_q: 1.5,
            witness_seed: 0,
            mollifier_width: None,
        }
    }
}

/// One index of a Mosco stability sweep.
#[derive(Debug, Clone)]
pub struct MoscoRow {
    pub n: usize,
    /// e_n = |u_n - u*|_{s,2}.
    pub seminorm_error: f64,
    /// Dual distance of laps{2s}(u_n - u*) at the configured dual exponent.
    pub dual_distance: f64,
    /// |psi_n|_{s, obstacle_q}.
    pub obstacle_seminorm: f64,
    /// |w_n - w|_{s,2} for the recovered feasible sample w.
    pub recovery_residual: f64,
    /// max over Omega of (psi_n - u_n)+.
    pub feasibility_violation: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct MoscoSweepReport {
    pub rows: Vec<MoscoRow>,
    pub base_iterations: usize,
    pub base_converged: bool,
    pub base_energy: f64,
    /// max over Omega of (psi - u*)+ for the limit pair.
    pub limit_feasibility_violation: f64,
    /// e_last / e_first.
    pub endpoint_ratio: f64,
    /// Rank correlation of n against e_n.
    pub trend: f64,
    /// recovery_last / recovery_first.
    pub recovery_endpoint_ratio: f64,
}

fn solve_row(problem: &VIProblem, opts: &VISolveOptions) -> Result<VISolution> {
    solve_vi(problem, opts)
}

/// Sweep the obstacle family, solving each perturbed problem and comparing
/// against the base solution in the H^s seminorm and in dual distance.
///
/// `obstacle_q > 2` is the exponent used to report obstacle seminorms. The
/// recovery column follows the feasible sample w = max(base, 0) restricted
/// to Omega: its own load laps{2s} w makes w the exact solution at the base
/// obstacle, and re-solving under psi_n must return to it.
pub fn run_mosco_sweep(
    f: &GridFunction,
    spec: &ObstacleSequenceSpec,
    s: f64,
    obstacle_q: f64,
    opts: &SweepOptions,
) -> Result<MoscoSweepReport> {
    if !(obstacle_q.is_finite() && obstacle_q > 2.0) {
        return Err(Error::invalid(
            "obstacle_q",
            format!("must exceed 2, got {obstacle_q}"),
        ));
    }
    let mask = &spec.mask;
    let grid = mask.grid();
    grid.ensure_same(&f.grid(), "sweep load")?;
    let params2 = NormParams::new(s, 2.0)?;

    let base_problem = VIProblem::new(s, mask.clone(), f.clone(), spec.base.clone())?;
    let base = solve_row(&base_problem, &opts.vi)?;
    let mut limit_violation = 0.0f64;
    for &i in mask.inside_indices() {
        limit_violation =
            limit_violation.max(spec.base.values()[i] - base.u.values()[i]);
    }

    // feasible sample recovered through its own load
    let w = mask.apply(&spec.base.map(|v| v.max(0.0))?)?;
    let fw = frac_laplacian(&w, 2.0 * s)?;

    let obstacles = make_obstacle_sequence(spec)?;
    let rows: Result<Vec<MoscoRow>> = obstacles
        .par_iter()
        .enumerate()
        .map(|(idx, psi_n)| {
            let n = idx + 1;
            let problem = VIProblem::new(s, mask.clone(), f.clone(), psi_n.clone())?;
            let sol = solve_row(&problem, &opts.vi)?;
            let diff = sol.u.sub(&base.u)?;
            let seminorm_error = hsp_seminorm(&diff, params2)?;
            let h_diff = frac_laplacian(&diff, 2.0 * s)?;
            let dual_distance = dual_norm_q(&h_diff, mask, s, opts.dual_q, &opts.dual)?.value;
            let obstacle_seminorm = lp_norm(&frac_laplacian(psi_n, s)?, obstacle_q)?;

            let recovery_problem = VIProblem::new(s, mask.clone(), fw.clone(), psi_n.clone())?;
            let recovery = solve_row(&recovery_problem, &opts.vi)?;
            let recovery_residual = hsp_seminorm(&recovery.u.sub(&w)?, params2)?;

            let mut feasibility_violation = 0.0f64;
            for &i in mask.inside_indices() {
                feasibility_violation =
                    feasibility_violation.max(psi_n.values()[i] - sol.u.values()[i]);
            }
            Ok(MoscoRow {
                n,
                seminorm_error,
                dual_distance,
                obstacle_seminorm,
                recovery_residual,
                feasibility_violation: feasibility_violation.max(0.0),
                iterations: sol.iterations,
                converged: sol.converged && recovery.converged,
            })
        })
        .collect();
    let rows = rows?;

    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.seminorm_error).collect();
    Ok(MoscoSweepReport {
        endpoint_ratio: last.seminorm_error / first.seminorm_error,
        trend: spearman(&ns, &es),
        recovery_endpoint_ratio: last.recovery_residual / first.recovery_residual,
        base_iterations: base.iterations,
        base_converged: base.converged,
        base_energy: base.energy,
        limit_feasibility_violation: limit_violation.max(0.0),
        rows,
    })
}

/// One index of a cone-compactness sweep.
#[derive(Debug, Clone)]
pub struct ConeRow {
    pub n: usize,
    /// Dual distance of h_n - h* at the sweep exponent q in (1, 2).
    pub dual_q_distance: f64,
    /// The same distance measured at the 2-level.
    pub dual_2_distance: f64,
    /// Nonnegativity probe: min of the mollified masked residual.
    pub min_mollified: f64,
    /// Pairings |<h_n - h*, phi_j>| against the fixed witnesses.
    pub witnesses: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ConeCompactnessReport {
    pub rows: Vec<ConeRow>,
    pub base_iterations: usize,
    pub base_converged: bool,
    /// d_q(last) / d_q(first).
    pub endpoint_ratio: f64,
    /// Rank correlation of n against d_q.
    pub trend: f64,
}

/// Sweep the obstacle family and measure how the nonnegative residuals
/// h_n = laps{2s} u_n - f converge to the base residual in H^{-s,q},
/// q in (1, 2), versus the 2-level.
///
/// Every h_n must pass the mollified nonnegativity probe (threshold
/// -10 * vi.tol); a failure aborts with an error.
pub fn run_cone_compactness(
    f: &GridFunction,
    spec: &ObstacleSequenceSpec,
    s: f64,
    q: f64,
    opts: &SweepOptions,
) -> Result<ConeCompactnessReport> {
    if !(q.is_finite() && q > 1.0 && q < 2.0) {
        return Err(Error::invalid("q", format!("must lie in (1, 2), got {q}")));
    }
    let mask = &spec.mask;
    let grid = mask.grid();
    grid.ensure_same(&f.grid(), "sweep load")?;
    let width = opts.mollifier_width.unwrap_or_else(|| 4.0 * grid.spacing());
    let witnesses = weak_witnesses(mask, 10, opts.witness_seed)?;

    let base_problem = VIProblem::new(s, mask.clone(), f.clone(), spec.base.clone())?;
    let base = solve_row(&base_problem, &opts.vi)?;
    let h_base = frac_laplacian(&base.u, 2.0 * s)?.sub(f)?;

    let obstacles = make_obstacle_sequence(spec)?;
    let rows: Result<Vec<ConeRow>> = obstacles
        .par_iter()
        .enumerate()
        .map(|(idx, psi_n)| {
            let n = idx + 1;
            let problem = VIProblem::new(s, mask.clone(), f.clone(), psi_n.clone())?;
            let sol = solve_row(&problem, &opts.vi)?;
            let h_n = frac_laplacian(&sol.u, 2.0 * s)?.sub(f)?;

            let (min_mollified, _) = mollified_min(&h_n, mask, width)?;
            if min_mollified < -10.0 * opts.vi.tol {
                return Err(Error::Infeasible(format!(
                    "residual at index {n} fails the nonnegativity probe: \
                     mollified minimum {min_mollified:e}"
                )));
            }

            let delta = h_n.sub(&h_base)?;
            let dual_q_distance = dual_norm_q(&delta, mask, s, q, &opts.dual)?.value;
            let dual_2_distance = dual_norm_2(&delta, mask, s)?;
            let witness_values: Result<Vec<f64>> = witnesses
                .iter()
                .map(|phi| Ok(delta.inner(phi)?.abs()))
                .collect();
            Ok(ConeRow {
                n,
                dual_q_distance,
                dual_2_distance,
                min_mollified,
                witnesses: witness_values?,
                iterations: sol.iterations,
                converged: sol.converged,
            })
        })
        .collect();
    let rows = rows?;

    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ds: Vec<f64> = rows.iter().map(|r| r.dual_q_distance).collect();
    Ok(ConeCompactnessReport {
        endpoint_ratio: ds[ds.len() - 1] / ds[0],
        trend: spearman(&ns, &ds),
        base_iterations: base.iterations,
        base_converged: base.converged,
        rows,
    })
}

/// Oscillating fields f_n under an envelope, together with their images
/// h_n = laps{s} f_n: bounded, weakly vanishing, but not strongly vanishing.
#[derive(Debug, Clone)]
pub struct CounterexampleSequence {
    pub fields: Vec<GridFunction>,
    pub images: Vec<GridFunction>,
}

/// Build f_n = envelope * prod_d cos(n stride pi x_d / L) for n = 1..n_max
/// and their order-s images.
pub fn counterexample_sequence(
    n_max: usize,
    stride: usize,
    s: f64,
    mask: &DomainMask,
    envelope: &GridFunction,
) -> Result<CounterexampleSequence> {
    if n_max == 0 {
        return Err(Error::invalid("n_max", "must be at least 1"));
    }
    if stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    let grid = mask.grid();
    grid.ensure_same(&envelope.grid(), "counterexample envelope")?;
    validate_envelope(envelope, mask)?;
    let budget = grid.points_per_dim() / 8;
    if n_max * stride > budget {
        return Err(Error::invalid(
            "n_max",
            format!(
                "n_max * stride = {} exceeds the resolvable budget M/8 = {budget}",
                n_max * stride
            ),
        ));
    }

    let scale = std::f64::consts::PI / grid.half_width();
    let mut fields = Vec::with_capacity(n_max);
    let mut images = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let freq = scale * (n * stride) as f64;
        let mut values = envelope.values().to_vec();
        for (i, v) in values.iter_mut().enumerate() {
            let x = grid.node(i);
            let osc: f64 = x[..grid.dim()].iter().map(|&c| (freq * c).cos()).product();
            *v *= osc;
        }
        let f_n = GridFunction::new(grid, values)?;
        let h_n = frac_laplacian(&f_n, s)?;
        fields.push(f_n);
        images.push(h_n);
    }
    Ok(CounterexampleSequence { fields, images })
}

/// One index of a counterexample run.
#[derive(Debug, Clone)]
pub struct CounterexampleRow {
    pub n: usize,
    pub l2_norm: f64,
    /// Lower bound for the H^{-s,q} norm of h_n.
    pub dual_q_norm: f64,
    /// H^{-s,2} norm of h_n.
    pub dual_2_norm: f64,
    /// Pairings |<f_n, phi_j>| against the fixed witnesses.
    pub witnesses: Vec<f64>,
    pub min_mollified: f64,
    pub max_mollified: f64,
}

#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub rows: Vec<CounterexampleRow>,
}

/// Tabulate dual norms, witness pairings and the (failing) nonnegativity
/// probe of a counterexample sequence.
pub fn run_counterexample(
    n_max: usize,
    stride: usize,
    s: f64,
    mask: &DomainMask,
    envelope: &GridFunction,
    q: f64,
    opts: &SweepOptions,
) -> Result<CounterexampleReport> {
    if !(q.is_finite() && q > 1.0 && q < 2.0) {
        return Err(Error::invalid("q", format!("must lie in (1, 2), got {q}")));
    }
    let grid = mask.grid();
    let width = opts.mollifier_width.unwrap_or_else(|| 4.0 * grid.spacing());
    let seq = counterexample_sequence(n_max, stride, s, mask, envelope)?;
    let witnesses = weak_witnesses(mask, 10, opts.witness_seed)?;

    let rows: Result<Vec<CounterexampleRow>> = (0..n_max)
        .into_par_iter()
        .map(|idx| {
            let f_n = &seq.fields[idx];
            let h_n = &seq.images[idx];
            let (min_mollified, max_mollified) = mollified_min(h_n, mask, width)?;
            let witness_values: Result<Vec<f64>> = witnesses
                .iter()
                .map(|phi| Ok(f_n.inner(phi)?.abs()))
                .collect();
            Ok(CounterexampleRow {
                n: idx + 1,
                l2_norm: lp_norm(f_n, 2.0)?,
                dual_q_norm: dual_norm_q(h_n, mask, s, q, &opts.dual)?.value,
                dual_2_norm: dual_norm_2(h_n, mask, s)?,
                witnesses: witness_values?,
                min_mollified,
                max_mollified,
            })
        })
        .collect();
    Ok(CounterexampleReport { rows: rows? })
}
