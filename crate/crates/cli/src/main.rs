//! Deterministic command-line runner for the fracspace toolkit.
//!
//! Every experiment is driven by a JSON config plus a seed; outputs are CSV
//! files with a config-hash breadcrumb, written atomically. Exit codes:
//! 0 success, 1 invalid input, 2 numerical non-convergence (partial outputs
//! are still written when they exist).

mod config;
mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use fracspace::dual::{dual_norm_2, dual_norm_q};
use fracspace::experiments::{
    run_cone_compactness, run_counterexample, run_mosco_sweep, ObstacleSequenceSpec, SweepOptions,
};
use fracspace::fields::random_field;
use fracspace::grid::{Grid, GridFunction};
use fracspace::norms::lp_norm;
use fracspace::qvi::{apply_obstacle_map, solve_qvi, ObstacleMapSpec, QVIOptions};
use fracspace::vi::{solve_unconstrained, solve_vi, VIProblem};
use fracspace::{bessel_inverse, frac_laplacian, riesz_potential, Error, Result};

use config::{
    config_hash, CounterexampleConfig, DualNormConfig, QviConfig, SolveViConfig, SweepConfig,
};
use report::{fmt_bool, fmt_float, fmt_int, CsvReport};

#[derive(Parser)]
#[command(
    name = "fracspace",
    version,
    about = "Fractional Sobolev toolkit: obstacle problems, dual norms, convergence experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check operator identities on random fields and print max residuals
    CheckOps(CheckOpsArgs),
    /// Solve one obstacle problem from a config file
    SolveVi(RunArgs),
    /// Evaluate a negative-order dual norm of a source field
    DualNorm(RunArgs),
    /// Obstacle-sequence sweep tracking solution stability
    MoscoSweep(RunArgs),
    /// Obstacle-sequence sweep tracking residual convergence in dual norm
    ConeCompactness(RunArgs),
    /// Oscillating sequence that converges weakly but not in dual norm
    Counterexample(RunArgs),
    /// Fixed point of the solution-dependent obstacle problem
    Qvi(RunArgs),
}

#[derive(Args)]
struct CheckOpsArgs {
    /// Grid shorthand dim:L:M, e.g. 1:2.0:64
    #[arg(long)]
    grid: String,
    /// Operator order, in (0, 2)
    #[arg(long)]
    s: f64,
    /// Number of random fields
    #[arg(long, default_value_t = 100)]
    fields: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional CSV destination for the residual table
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 picks the machine default
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Overrides the command's main solver tolerance
    #[arg(long)]
    tol: Option<f64>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::CheckOps(args) => cmd_check_ops(args),
        Command::SolveVi(args) => cmd_solve_vi(args),
        Command::DualNorm(args) => cmd_dual_norm(args),
        Command::MoscoSweep(args) => cmd_mosco_sweep(args),
        Command::ConeCompactness(args) => cmd_cone_compactness(args),
        Command::Counterexample(args) => cmd_counterexample(args),
        Command::Qvi(args) => cmd_qvi(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::NoConvergence { .. } | Error::NonFinite { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid("config", format!("read {}: {e}", path.display())))?;
    config::parse(&text)
}

/// Pick the effective output path: the flag wins, and the field is cleared
/// so the config hash never depends on where the file lands.
fn resolve_out(field: &mut Option<String>, flag: &Option<PathBuf>) -> Result<PathBuf> {
    let from_field = field.take().map(PathBuf::from);
    flag.clone().or(from_field).ok_or_else(|| {
        Error::invalid("output_path", "missing; set it in the config or pass --out")
    })
}

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(job))
}

fn coordinate_columns(grid: Grid) -> Vec<&'static str> {
    if grid.dim() == 1 {
        vec!["index", "x1"]
    } else {
        vec!["index", "x1", "x2"]
    }
}

fn coordinate_cells(grid: Grid, idx: usize) -> Vec<String> {
    let node = grid.node(idx);
    let mut cells = vec![fmt_int(idx)];
    for d in 0..grid.dim() {
        cells.push(fmt_float(node[d]));
    }
    cells
}

fn parse_grid_shorthand(text: &str) -> Result<Grid> {
    let parts: Vec<&str> = text.split(':').collect();
    let err = || Error::invalid("grid", format!("expected dim:L:M, got {text}"));
    if parts.len() != 3 {
        return Err(err());
    }
    let dim: usize = parts[0].parse().map_err(|_| err())?;
    let half_width: f64 = parts[1].parse().map_err(|_| err())?;
    let points: usize = parts[2].parse().map_err(|_| err())?;
    Grid::new(dim, half_width, points)
}

fn cmd_check_ops(args: &CheckOpsArgs) -> Result<i32> {
    let grid = parse_grid_shorthand(&args.grid)?;
    let s = args.s;
    if !(s.is_finite() && s > 0.0 && s < 2.0) {
        return Err(Error::invalid("s", format!("must lie in (0, 2), got {s}")));
    }
    if args.fields == 0 {
        return Err(Error::invalid("fields", "must be at least 1"));
    }
    let run_riesz = s < grid.dim() as f64;

    let mut ibp = 0.0f64;
    let mut semigroup = 0.0f64;
    let mut bessel = 0.0f64;
    let mut riesz = 0.0f64;
    for i in 0..args.fields as u64 {
        let f = random_field(grid, args.seed.wrapping_add(2 * i), 1.0)?;
        let g = random_field(grid, args.seed.wrapping_add(2 * i + 1), 1.0)?;

        let lf = frac_laplacian(&f, s)?;
        let lg = frac_laplacian(&g, s)?;
        let scale = lp_norm(&f, 2.0)? * lp_norm(&g, 2.0)?;
        ibp = ibp.max((lf.inner(&g)? - f.inner(&lg)?).abs() / scale);

        let twice = frac_laplacian(&frac_laplacian(&f, s / 2.0)?, s / 2.0)?;
        semigroup = semigroup.max(twice.sub(&lf)?.max_abs());

        let bs = bessel_inverse(&f, s)?;
        bessel = bessel.max(frac_laplacian(&bs, s)?.add(&bs)?.sub(&f)?.max_abs());

        if run_riesz {
            let f0 = f.map(|v| v - f.mean())?;
            let back = riesz_potential(&frac_laplacian(&f0, s)?, s)?;
            riesz = riesz.max(back.sub(&f0)?.max_abs());
        }
    }

    println!("integration-by-parts: max residual {ibp:.3e}");
    println!("semigroup: max residual {semigroup:.3e}");
    println!("bessel-decomposition: max residual {bessel:.3e}");
    if run_riesz {
        println!("riesz-roundtrip: max residual {riesz:.3e}");
    } else {
        println!("riesz-roundtrip: skipped (s >= {})", grid.dim());
    }

    if let Some(out) = &args.out {
        let hash_input = format!(
            "check-ops grid={}:{}:{} s={} fields={} seed={}",
            grid.dim(),
            grid.half_width(),
            grid.points_per_dim(),
            s,
            args.fields,
            args.seed
        );
        let mut csv = CsvReport::new(&config_hash(&hash_input), "check-ops");
        csv.header(&["identity", "max_residual"]);
        csv.row(&["integration-by-parts".into(), fmt_float(ibp)]);
        csv.row(&["semigroup".into(), fmt_float(semigroup)]);
        csv.row(&["bessel-decomposition".into(), fmt_float(bessel)]);
        if run_riesz {
            csv.row(&["riesz-roundtrip".into(), fmt_float(riesz)]);
        }
        csv.write_atomic(out)?;
    }
    Ok(0)
}

fn cmd_solve_vi(args: &RunArgs) -> Result<i32> {
    let mut cfg: SolveViConfig = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.vi.tol = tol;
    }
    let out = resolve_out(&mut cfg.output_path, &args.out)?;
    let hash = config_hash(&cfg);

    let grid = cfg.grid.build()?;
    let mask = cfg.mask.build(grid)?;
    let load = cfg.load.build(grid, cfg.seed)?;
    let obstacle = cfg.obstacle.build(grid, cfg.seed)?;
    let problem = VIProblem::new(cfg.s, mask, load.clone(), obstacle.clone())?;
    let solution = with_pool(args.threads, || solve_vi(&problem, &cfg.vi.build()))??;
    let residual = frac_laplacian(&solution.u, 2.0 * cfg.s)?.sub(&load)?;

    let mut csv = CsvReport::new(&hash, "solve-vi");
    csv.comment("converged", solution.converged);
    csv.comment("iterations", solution.iterations);
    csv.comment_float("energy", solution.energy);
    csv.comment_float("primal_violation", solution.primal_violation);
    csv.comment_float("dual_violation", solution.dual_violation);
    csv.comment_float("complementarity_gap", solution.complementarity_gap);
    let mut columns = coordinate_columns(grid);
    columns.extend_from_slice(&["load", "obstacle", "solution", "residual"]);
    csv.header(&columns);
    for idx in 0..grid.node_count() {
        let mut cells = coordinate_cells(grid, idx);
        cells.push(fmt_float(load.values()[idx]));
        cells.push(fmt_float(obstacle.values()[idx]));
        cells.push(fmt_float(solution.u.values()[idx]));
        cells.push(fmt_float(residual.values()[idx]));
        csv.row(&cells);
    }
    csv.write_atomic(&out)?;
    Ok(if solution.converged { 0 } else { 2 })
}

fn cmd_dual_norm(args: &RunArgs) -> Result<i32> {
    let mut cfg: DualNormConfig = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.dual.tol = tol;
    }
    let out = resolve_out(&mut cfg.output_path, &args.out)?;
    let hash = config_hash(&cfg);

    let grid = cfg.grid.build()?;
    let mask = cfg.mask.build(grid)?;
    let source = cfg.source.build(grid, cfg.seed)?;

    let (value, maximizer, iterations, certificate_gap, certified) = if cfg.q == 2.0 {
        let value = with_pool(args.threads, || dual_norm_2(&source, &mask, cfg.s))??;
        // exact route: the maximizer is the normalized potential
        let potential = solve_unconstrained(&source, &mask, cfg.s, 1e-10)?;
        let maximizer = if value > 0.0 {
            potential.scale(1.0 / value)?
        } else {
            potential
        };
        (value, maximizer, 0usize, 0.0f64, true)
    } else {
        let result = with_pool(args.threads, || {
            dual_norm_q(&source, &mask, cfg.s, cfg.q, &cfg.dual.build())
        })??;
        (
            result.value,
            result.maximizer,
            result.iterations,
            result.certificate_gap,
            result.certified,
        )
    };

    let mut csv = CsvReport::new(&hash, "dual-norm");
    csv.comment_float("value", value);
    csv.comment("iterations", iterations);
    csv.comment_float("certificate_gap", certificate_gap);
    csv.comment("certified", certified);
    let mut columns = coordinate_columns(grid);
    columns.extend_from_slice(&["source", "maximizer"]);
    csv.header(&columns);
    for idx in 0..grid.node_count() {
        let mut cells = coordinate_cells(grid, idx);
        cells.push(fmt_float(source.values()[idx]));
        cells.push(fmt_float(maximizer.values()[idx]));
        csv.row(&cells);
    }
    csv.write_atomic(&out)?;
    Ok(if certified { 0 } else { 2 })
}

struct SweepParts {
    spec: ObstacleSequenceSpec,
    load: GridFunction,
    opts: SweepOptions,
    s: f64,
    hash: String,
    out: PathBuf,
}

fn sweep_parts(args: &RunArgs, mut cfg: SweepConfig) -> Result<SweepParts> {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.vi.tol = tol;
    }
    let out = resolve_out(&mut cfg.output_path, &args.out)?;
    let hash = config_hash(&cfg);

    let grid = cfg.grid.build()?;
    let mask = cfg.mask.build(grid)?;
    let load = cfg.load.build(grid, cfg.seed)?;
    let base = cfg.base_obstacle.build(grid, cfg.seed)?;
    let envelope = mask.apply(&cfg.envelope.build(grid, cfg.seed)?)?;
    let decay = cfg.decay_exponent.unwrap_or(cfg.s);
    let spec = ObstacleSequenceSpec::new(
        base,
        mask,
        envelope,
        cfg.amplitude,
        decay,
        cfg.stride,
        cfg.count,
    )?;
    let opts = SweepOptions {
        vi: cfg.vi.build(),
        dual: cfg.dual.build(),
        dual_q: cfg.dual_q,
        witness_seed: cfg.seed,
        mollifier_width: cfg.mollifier_width,
    };
    Ok(SweepParts {
        spec,
        load,
        opts,
        s: cfg.s,
        hash,
        out,
    })
}

fn cmd_mosco_sweep(args: &RunArgs) -> Result<i32> {
    let cfg: SweepConfig = read_config(&args.config)?;
    let obstacle_q = cfg.obstacle_q;
    let parts = sweep_parts(args, cfg)?;
    let report = with_pool(args.threads, || {
        run_mosco_sweep(&parts.load, &parts.spec, parts.s, obstacle_q, &parts.opts)
    })??;

    let mut csv = CsvReport::new(&parts.hash, "mosco-sweep");
    csv.comment("base_converged", report.base_converged);
    csv.comment("base_iterations", report.base_iterations);
    csv.comment_float("base_energy", report.base_energy);
    csv.comment_float(
        "limit_feasibility_violation",
        report.limit_feasibility_violation,
    );
    csv.comment_float("endpoint_ratio", report.endpoint_ratio);
    csv.comment_float("trend", report.trend);
    csv.comment_float("recovery_endpoint_ratio", report.recovery_endpoint_ratio);
    csv.header(&[
        "n",
        "seminorm_error",
        "dual_distance",
        "obstacle_seminorm",
        "recovery_residual",
        "feasibility_violation",
        "iterations",
        "converged",
    ]);
    let mut all_converged = report.base_converged;
    for row in &report.rows {
        all_converged &= row.converged;
        csv.row(&[
            fmt_int(row.n),
            fmt_float(row.seminorm_error),
            fmt_float(row.dual_distance),
            fmt_float(row.obstacle_seminorm),
            fmt_float(row.recovery_residual),
            fmt_float(row.feasibility_violation),
            fmt_int(row.iterations),
            fmt_bool(row.converged),
        ]);
    }
    csv.write_atomic(&parts.out)?;
    Ok(if all_converged { 0 } else { 2 })
}

fn cmd_cone_compactness(args: &RunArgs) -> Result<i32> {
    let cfg: SweepConfig = read_config(&args.config)?;
    let q = cfg.dual_q;
    let parts = sweep_parts(args, cfg)?;
    let report = with_pool(args.threads, || {
        run_cone_compactness(&parts.load, &parts.spec, parts.s, q, &parts.opts)
    })??;

    let mut csv = CsvReport::new(&parts.hash, "cone-compactness");
    csv.comment("base_converged", report.base_converged);
    csv.comment("base_iterations", report.base_iterations);
    csv.comment_float("endpoint_ratio", report.endpoint_ratio);
    csv.comment_float("trend", report.trend);
    let mut columns = vec![
        "n".to_string(),
        "dual_q_distance".to_string(),
        "dual_2_distance".to_string(),
        "min_mollified".to_string(),
    ];
    let witness_count = report.rows.first().map_or(0, |r| r.witnesses.len());
    for j in 1..=witness_count {
        columns.push(format!("witness_{j:02}"));
    }
    columns.push("iterations".to_string());
    columns.push("converged".to_string());
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    csv.header(&column_refs);
    let mut all_converged = report.base_converged;
    for row in &report.rows {
        all_converged &= row.converged;
        let mut cells = vec![
            fmt_int(row.n),
            fmt_float(row.dual_q_distance),
            fmt_float(row.dual_2_distance),
            fmt_float(row.min_mollified),
        ];
        cells.extend(row.witnesses.iter().map(|&w| fmt_float(w)));
        cells.push(fmt_int(row.iterations));
        cells.push(fmt_bool(row.converged));
        csv.row(&cells);
    }
    csv.write_atomic(&parts.out)?;
    Ok(if all_converged { 0 } else { 2 })
}

fn cmd_counterexample(args: &RunArgs) -> Result<i32> {
    let mut cfg: CounterexampleConfig = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.dual.tol = tol;
    }
    let out = resolve_out(&mut cfg.output_path, &args.out)?;
    let hash = config_hash(&cfg);

    let grid = cfg.grid.build()?;
    let mask = cfg.mask.build(grid)?;
    let envelope = mask.apply(&cfg.envelope.build(grid, cfg.seed)?)?;
    let opts = SweepOptions {
        dual: cfg.dual.build(),
        dual_q: cfg.q,
        witness_seed: cfg.seed,
        mollifier_width: cfg.mollifier_width,
        ..SweepOptions::default()
    };
    let report = with_pool(args.threads, || {
        run_counterexample(cfg.n_max, cfg.stride, cfg.s, &mask, &envelope, cfg.q, &opts)
    })??;

    let mut csv = CsvReport::new(&hash, "counterexample");
    let mut columns = vec![
        "n".to_string(),
        "l2_norm".to_string(),
        "dual_q_norm".to_string(),
        "dual_2_norm".to_string(),
        "min_mollified".to_string(),
        "max_mollified".to_string(),
    ];
    let witness_count = report.rows.first().map_or(0, |r| r.witnesses.len());
    for j in 1..=witness_count {
        columns.push(format!("witness_{j:02}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    csv.header(&column_refs);
    for row in &report.rows {
        let mut cells = vec![
            fmt_int(row.n),
            fmt_float(row.l2_norm),
            fmt_float(row.dual_q_norm),
            fmt_float(row.dual_2_norm),
            fmt_float(row.min_mollified),
            fmt_float(row.max_mollified),
        ];
        cells.extend(row.witnesses.iter().map(|&w| fmt_float(w)));
        csv.row(&cells);
    }
    csv.write_atomic(&out)?;
    Ok(0)
}

fn cmd_qvi(args: &RunArgs) -> Result<i32> {
    let mut cfg: QviConfig = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.outer_tol = tol;
    }
    let out = resolve_out(&mut cfg.output_path, &args.out)?;
    let hash = config_hash(&cfg);

    let grid = cfg.grid.build()?;
    let mask = cfg.mask.build(grid)?;
    let load = cfg.load.build(grid, cfg.seed)?;
    let envelope = mask.apply(&cfg.envelope.build(grid, cfg.seed)?)?;
    let map = ObstacleMapSpec::new(cfg.mollifier_width, cfg.shift, envelope, &mask)?;
    let opts = QVIOptions {
        outer_tol: cfg.outer_tol,
        outer_max: cfg.outer_max,
        damping: cfg.damping,
        inner: cfg.inner.build(),
        start: None,
    };
    let result = with_pool(args.threads, || solve_qvi(&load, &map, &mask, cfg.s, &opts))??;
    let final_obstacle = apply_obstacle_map(&result.u, &map)?;

    let mut csv = CsvReport::new(&hash, "qvi");
    csv.comment("converged", result.converged);
    csv.comment("outer_iterations", result.outer_iterations);
    csv.comment_float(
        "final_residual",
        result.residual_trace.last().copied().unwrap_or(f64::NAN),
    );
    let mut columns = coordinate_columns(grid);
    columns.extend_from_slice(&["load", "solution", "obstacle_at_solution"]);
    csv.header(&columns);
    for idx in 0..grid.node_count() {
        let mut cells = coordinate_cells(grid, idx);
        cells.push(fmt_float(load.values()[idx]));
        cells.push(fmt_float(result.u.values()[idx]));
        cells.push(fmt_float(final_obstacle.values()[idx]));
        csv.row(&cells);
    }
    csv.write_atomic(&out)?;
    Ok(if result.converged { 0 } else { 2 })
}
