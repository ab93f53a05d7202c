//! Obstacle problems for the fractional Laplacian on a masked domain.
//!
//! The variational inequality reads: find u >= psi on Omega, u = 0 outside,
//! with <laps{s}u, laps{s}(v - u)> >= f[v - u] for all admissible v. It is
//! the optimality condition of E(u) = 1/2 |u|_{s,2}^2 - f[u] over the convex
//! admissible set, solved here by an accelerated projected gradient method
//! with monotone restarts. A dense active-set solver doubles as an exact
//! small-scale oracle.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::dense::kernel_matrix;
use crate::error::{Error, Result};
use crate::grid::{DomainMask, GridFunction};
use crate::spectral::{apply_table_vec, MultiplierSymbol};

/// Node budget for the dense active-set oracle.
pub const ORACLE_NODE_LIMIT: usize = 2048;

/// Obstacle problem data: order s, domain, load f and obstacle psi.
#[derive(Debug, Clone)]
pub struct VIProblem {
    s: f64,
    mask: DomainMask,
    f: GridFunction,
    psi: GridFunction,
}

impl VIProblem {
    pub fn new(s: f64, mask: DomainMask, f: GridFunction, psi: GridFunction) -> Result<Self> {
        if !(s.is_finite() && s > 0.0 && s <= 1.0) {
            return Err(Error::invalid("s", format!("must lie in (0, 1], got {s}")));
        }
        let grid = mask.grid();
        grid.ensure_same(&f.grid(), "obstacle problem load")?;
        grid.ensure_same(&psi.grid(), "obstacle problem obstacle")?;
        for (i, &v) in psi.values().iter().enumerate() {
            if !mask.is_inside(i) && v > 0.0 {
                return Err(Error::Infeasible(format!(
                    "obstacle is positive ({v}) at node {i} outside the domain; \
                     zero extension cannot stay admissible"
                )));
            }
        }
        Ok(VIProblem { s, mask, f, psi })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn load(&self) -> &GridFunction {
        &self.f
    }

    pub fn obstacle(&self) -> &GridFunction {
        &self.psi
    }
}

/// Stopping controls for [`solve_vi`].
#[derive(Debug, Clone, Copy)]
pub struct VISolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for VISolveOptions {
    fn default() -> Self {
        VISolveOptions {
            tol: 1e-8,
            max_iter: 20_000,
        }
    }
}

impl VISolveOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Converged (or partial) obstacle problem solution with its diagnostics.
#[derive(Debug, Clone)]
pub struct VISolution {
    pub u: GridFunction,
    pub iterations: usize,
    pub converged: bool,
    /// max over Omega of (psi - u)+; zero by construction of the projection.
    pub primal_violation: f64,
    /// max over Omega of (-(laps{2s}u - f))+.
    pub dual_violation: f64,
    /// spacing^N |sum_Omega (laps{2s}u - f)(u - psi)|.
    pub complementarity_gap: f64,
    pub energy: f64,
}

/// E(u) = 1/2 ||laps{s}u||_2^2 - f[u].
pub fn energy(u: &GridFunction, f: &GridFunction, s: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0 && s <= 1.0) {
        return Err(Error::invalid("s", format!("must lie in (0, 1], got {s}")));
    }
    u.grid().ensure_same(&f.grid(), "energy")?;
    let table = MultiplierSymbol::power(s).table(u.grid())?;
    let lu = apply_table_vec(u.grid(), u.values(), &table);
    let vol = u.grid().cell_volume();
    let seminorm_sq: f64 = lu.iter().map(|v| v * v).sum::<f64>() * vol;
    let load: f64 = u
        .values()
        .iter()
        .zip(f.values())
        .map(|(&a, &b)| a * b)
        .sum::<f64>()
        * vol;
    Ok(0.5 * seminorm_sq - load)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Galerkin solve of <laps{s}u, laps{s}phi> = f[phi] over fields vanishing
/// outside Omega: preconditioned conjugate gradients on the masked order-2s
/// operator, stopped at a relative residual of `tol`.
pub fn solve_unconstrained(
    f: &GridFunction,
    mask: &DomainMask,
    s: f64,
    tol: f64,
) -> Result<GridFunction> {
    if !(s.is_finite() && s > 0.0 && s <= 1.0) {
        return Err(Error::invalid("s", format!("must lie in (0, 1], got {s}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be positive, got {tol}")));
    }
    let grid = mask.grid();
    grid.ensure_same(&f.grid(), "unconstrained solve load")?;

    const MAX_ITER: usize = 50_000;
    let n = grid.node_count();
    let op_table = MultiplierSymbol::power(2.0 * s).table(grid)?;
    let pre_table = MultiplierSymbol::bessel_inverse(2.0 * s).table(grid)?;

    let mask_in_place = |v: &mut [f64]| {
        for (i, slot) in v.iter_mut().enumerate() {
            if !mask.is_inside(i) {
                *slot = 0.0;
            }
        }
    };
    let apply_op = |v: &[f64]| {
        let mut out = apply_table_vec(grid, v, &op_table);
        mask_in_place(&mut out);
        out
    };
    let apply_pre = |v: &[f64]| {
        let mut out = apply_table_vec(grid, v, &pre_table);
        mask_in_place(&mut out);
        out
    };

    let mut b = f.values().to_vec();
    mask_in_place(&mut b);
    let b_norm = norm2(&b);
    if b_norm == 0.0 {
        return Ok(GridFunction::zeros(grid));
    }
    let target = tol * b_norm;

    let mut u = vec![0.0f64; n];
    let mut r = b.clone();
    let mut z = apply_pre(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for iteration in 0..MAX_ITER {
        if norm2(&r) <= target {
            // recurrence residuals drift; confirm against the true residual
            let au = apply_op(&u);
            let mut true_r = b.clone();
            for i in 0..n {
                true_r[i] -= au[i];
            }
            if norm2(&true_r) <= target {
                return GridFunction::new(grid, u);
            }
            r = true_r;
            z = apply_pre(&r);
            p = z.clone();
            rz = dot(&r, &z);
        }
        let ap = apply_op(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NoConvergence {
                solver: "preconditioned conjugate gradients",
                iterations: iteration,
                residual: norm2(&r) / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            u[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        z = apply_pre(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        solver: "preconditioned conjugate gradients",
        iterations: MAX_ITER,
        residual: norm2(&r) / b_norm,
    })
}

/// Solve the obstacle problem by accelerated projected gradient descent.
///
/// The step size is 0.9 over the largest symbol value on the lattice; the
/// momentum sequence restarts whenever it would increase the energy, so
/// recorded energies are nonincreasing. Stops once the complementarity gap,
/// the dual violation and the H^s change of the iterate all fall below
/// `tol`; hitting `max_iter` returns the partial iterate flagged
/// `converged = false`.
pub fn solve_vi(problem: &VIProblem, opts: &VISolveOptions) -> Result<VISolution> {
    opts.validate()?;
    let grid = problem.mask.grid();
    let n = grid.node_count();
    let vol = grid.cell_volume();
    let s2 = 2.0 * problem.s;
    let op_table = MultiplierSymbol::power(s2).table(grid)?;
    let psi = problem.psi.values();
    let fv = problem.f.values();

    let lambda_max = grid.max_frequency_norm().powf(s2);
    let step = 0.9 / lambda_max;

    let project = |v: &mut [f64]| {
        for i in 0..n {
            if problem.mask.is_inside(i) {
                v[i] = v[i].max(psi[i]);
            } else {
                v[i] = 0.0;
            }
        }
    };
    let apply_op = |v: &[f64]| apply_table_vec(grid, v, &op_table);
    // E(x) from the cached operator image: 1/2 <Kx, x> - <f, x>
    let energy_of = |x: &[f64], gx: &[f64]| vol * (0.5 * dot(gx, x) - dot(fv, x));

    // feasible start max(psi, 0) on Omega
    let mut x = vec![0.0f64; n];
    for i in 0..n {
        if problem.mask.is_inside(i) {
            x[i] = psi[i].max(0.0);
        }
    }
    let mut gx = apply_op(&x);
    let mut ex = energy_of(&x, &gx);
    let mut x_prev = x.clone();
    let mut gx_prev = gx.clone();
    let mut t = 1.0f64;

    let mut iterations = 0;
    let mut converged = false;
    let mut dual_violation = f64::INFINITY;
    let mut complementarity_gap = f64::INFINITY;

    while iterations < opts.max_iter {
        iterations += 1;
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;

        // extrapolated point and its operator image by linearity
        let mut z: Vec<f64> = (0..n)
            .map(|i| {
                let y = x[i] + beta * (x[i] - x_prev[i]);
                let gy = gx[i] + beta * (gx[i] - gx_prev[i]);
                y - step * (gy - fv[i])
            })
            .collect();
        project(&mut z);
        let mut gz = apply_op(&z);
        let mut ez = energy_of(&z, &gz);

        if ez <= ex + 1e-14 * (1.0 + ex.abs()) {
            t = t_next;
        } else {
            // momentum would increase the energy: restart from x
            z = (0..n).map(|i| x[i] - step * (gx[i] - fv[i])).collect();
            project(&mut z);
            gz = apply_op(&z);
            ez = energy_of(&z, &gz);
            t = 1.0;
        }

        x_prev = std::mem::replace(&mut x, z);
        gx_prev = std::mem::replace(&mut gx, gz);
        ex = ez;

        // H^s distance between consecutive iterates via <K d, d> = |d|_{s,2}^2
        let mut kd_d = 0.0;
        for i in 0..n {
            kd_d += (gx[i] - gx_prev[i]) * (x[i] - x_prev[i]);
        }
        let seminorm_change = (vol * kd_d).max(0.0).sqrt();

        dual_violation = 0.0f64;
        let mut gap = 0.0f64;
        for i in 0..n {
            if problem.mask.is_inside(i) {
                let r = gx[i] - fv[i];
                dual_violation = dual_violation.max(-r);
                gap += r * (x[i] - psi[i]);
            }
        }
        dual_violation = dual_violation.max(0.0);
        complementarity_gap = (vol * gap).abs();

        if seminorm_change <= opts.tol
            && dual_violation <= opts.tol
            && complementarity_gap <= opts.tol
        {
            converged = true;
            break;
        }
    }

    let mut primal_violation = 0.0f64;
    for i in 0..n {
        if problem.mask.is_inside(i) {
            primal_violation = primal_violation.max(psi[i] - x[i]);
        }
    }
    let u = GridFunction::new(grid, x)?;
    let e = energy(&u, &problem.f, problem.s)?;
    Ok(VISolution {
        u,
        iterations,
        converged,
        primal_violation: primal_violation.max(0.0),
        dual_violation,
        complementarity_gap,
        energy: e,
    })
}

/// Solve the obstacle problem exactly (up to linear-solve rounding) with a
/// primal active-set method on the dense restricted operator.
///
/// Intended as a small-scale reference: the grid may have at most
/// [`ORACLE_NODE_LIMIT`] nodes.
pub fn dense_vi_oracle(problem: &VIProblem) -> Result<GridFunction> {
    let grid = problem.mask.grid();
    let n = grid.node_count();
    if n > ORACLE_NODE_LIMIT {
        return Err(Error::DenseTooLarge {
            nodes: n,
            limit: ORACLE_NODE_LIMIT,
        });
    }
    let kernel = kernel_matrix(grid, 2.0 * problem.s)?;
    let inside = problem.mask.inside_indices();
    let m = inside.len();

    let a = DMatrix::from_fn(m, m, |r, c| kernel.entry(inside[r], inside[c]));
    let b = DVector::from_fn(m, |r, _| problem.f.values()[inside[r]]);
    let psi = DVector::from_fn(m, |r, _| problem.psi.values()[inside[r]]);

    let scale = 1.0 + b.amax().max(psi.amax());
    let solve_free = |active: &[bool]| -> Result<DVector<f64>> {
        let free: Vec<usize> = (0..m).filter(|&i| !active[i]).collect();
        let mut v = DVector::from_fn(m, |r, _| if active[r] { psi[r] } else { 0.0 });
        if free.is_empty() {
            return Ok(v);
        }
        let aff = DMatrix::from_fn(free.len(), free.len(), |r, c| a[(free[r], free[c])]);
        let mut rhs = DVector::from_fn(free.len(), |r, _| b[free[r]]);
        for (r, &i) in free.iter().enumerate() {
            for j in 0..m {
                if active[j] {
                    rhs[r] -= a[(i, j)] * psi[j];
                }
            }
        }
        let chol = Cholesky::new(aff).ok_or(Error::NoConvergence {
            solver: "dense active-set oracle",
            iterations: 0,
            residual: f64::NAN,
        })?;
        let x = chol.solve(&rhs);
        for (r, &i) in free.iter().enumerate() {
            v[i] = x[r];
        }
        Ok(v)
    };

    // warm start: clip the unconstrained solution at the obstacle
    let mut active = vec![false; m];
    let mut u = solve_free(&active)?;
    for i in 0..m {
        if u[i] <= psi[i] {
            u[i] = psi[i];
            active[i] = true;
        }
    }

    let max_steps = 5 * m + 10;
    for _ in 0..max_steps {
        let v = solve_free(&active)?;
        let d = &v - &u;
        if d.amax() <= 1e-13 * scale {
            // stationary on the working set: check the multipliers
            let r = &a * &u - &b;
            let mut worst = (0usize, 0.0f64);
            for i in 0..m {
                if active[i] && r[i] < worst.1 {
                    worst = (i, r[i]);
                }
            }
            if worst.1 >= -1e-11 * scale {
                let mut values = vec![0.0f64; n];
                for (r_idx, &node) in inside.iter().enumerate() {
                    values[node] = u[r_idx];
                }
                return GridFunction::new(grid, values);
            }
            active[worst.0] = false;
            continue;
        }
        // longest feasible step along d, blocking at the first bound hit
        let mut alpha = 1.0f64;
        let mut blocker = None;
        for i in 0..m {
            if !active[i] && d[i] < 0.0 {
                let room = (psi[i] - u[i]) / d[i];
                if room < alpha {
                    alpha = room;
                    blocker = Some(i);
                }
            }
        }
        u += alpha * &d;
        if let Some(i) = blocker {
            u[i] = psi[i];
            active[i] = true;
        }
    }
    Err(Error::NoConvergence {
        solver: "dense active-set oracle",
        iterations: max_steps,
        residual: f64::NAN,
    })
}
