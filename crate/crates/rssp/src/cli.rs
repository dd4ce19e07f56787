//! Command-line front door: generate, solve, bench, coverage, fit.
//!
//! Results go to stdout (or `--out`); diagnostics, including the fully
//! resolved configuration of every run, go to stderr. Usage errors exit
//! with code 2, solver errors with code 1. The `RSSP_SEED` environment
//! variable overrides `--seed` when set.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rssp_core::baselines::{
    exact_min_error, fptas_gens_levner, run_metaheuristic, MetaheuristicParams,
};
use rssp_core::coverage::phase_a_coverage_experiment;
use rssp_core::instance::{DistributionSpec, Family, Instance, Support, TargetRule};
use rssp_core::mitm::{
    mitm_reconstruct, mitm_solve_full, split_point, PhaseAVariant, SplitRule,
};
use rssp_core::reconstruct::{forward_with_checkpoints, reconstruct_subset};
use rssp_core::variants::{bounded_mitm_solve, vector_mitm_solve, VectorInstance};

use crate::experiments::{
    default_cardinality_budget, run_sweep, run_vector_sweep, Method, SweepConfig,
    VectorSweepConfig,
};
use crate::fit::fit_method;
use crate::io::{emit_records, read_records, write_json, write_records, OutputFormat};

#[derive(Parser, Debug)]
#[command(
    name = "rssp",
    version,
    about = "Subset sum approximation toolkit: beam search solvers, baselines, and a Monte Carlo benchmark harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an instance and print it as JSON.
    Generate(GenerateArgs),
    /// Generate one instance and solve it with a chosen method.
    Solve(SolveArgs),
    /// Run a Monte Carlo sweep and emit trial records (CSV or JSONL).
    Bench(BenchArgs),
    /// Bucket-coverage experiment for the anchor mesh construction.
    Coverage(CoverageArgs),
    /// Fit power laws to the records produced by bench.
    Fit(FitArgs),
}

#[derive(Args, Debug)]
pub struct DistFlags {
    /// Distribution family: uniform, normal, lognormal, bimodal, student_t.
    #[arg(long, default_value = "uniform")]
    pub dist: String,
    /// Support: symmetric [-B, B] or nonnegative [0, B].
    #[arg(long, default_value = "symmetric")]
    pub support: String,
    /// Student-t degrees of freedom (1 = Cauchy).
    #[arg(long, default_value_t = 2)]
    pub nu: u32,
    /// Magnitude bound B, in weight units.
    #[arg(long = "B", default_value_t = 1_000_000_000_000)]
    pub bound: i64,
}

impl DistFlags {
    pub fn to_spec(&self) -> anyhow::Result<DistributionSpec> {
        let family = match self.dist.as_str() {
            "uniform" => Family::Uniform,
            "normal" => Family::Normal,
            "lognormal" => Family::Lognormal,
            "bimodal" => Family::Bimodal,
            "student_t" | "student-t" | "studentt" => Family::StudentT,
            other => bail!("unknown distribution {other:?}"),
        };
        let support = match self.support.as_str() {
            "symmetric" => Support::Symmetric,
            "nonnegative" => Support::Nonnegative,
            other => bail!("unknown support {other:?}"),
        };
        Ok(DistributionSpec::new(family, support, self.bound).with_nu(self.nu))
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub dist: DistFlags,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Target rule: random (planted subset) or tail:F.
    #[arg(long, default_value = "random")]
    pub target: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub dist: DistFlags,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Beam width.
    #[arg(long, default_value_t = 64)]
    pub w: usize,
    /// Split rule: half, fixed:K, or logw:C.
    #[arg(long, default_value = "logw:4")]
    pub split: String,
    /// mitm, mitm-equi, plain, bounded, sa, ga, pso, tabu, aoa, fptas, exact.
    #[arg(long, default_value = "mitm")]
    pub method: String,
    /// Target rule: random or tail:F.
    #[arg(long, default_value = "random")]
    pub target: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Cardinality budget for the bounded variant.
    #[arg(long)]
    pub k: Option<usize>,
    /// Vector dimension; values above 1 run the vector solver (mitm only).
    #[arg(long)]
    pub d: Option<usize>,
    /// Also reconstruct and include the chosen subset.
    #[arg(long)]
    pub reconstruct: bool,
    /// Metaheuristic evaluation budget (default n * w).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Relative accuracy for the trimming scheme.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Dump the per-layer residual-beam trace as JSON lines to this path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub dist: DistFlags,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Comma-separated beam width grid.
    #[arg(long = "w-grid", value_delimiter = ',', default_value = "8,16,32,64,128,256")]
    pub w_grid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value = "logw:4")]
    pub split: String,
    /// Methods to run on each paired instance (repeat or comma-separate).
    #[arg(long = "method", value_delimiter = ',', default_value = "mitm")]
    pub methods: Vec<String>,
    #[arg(long, default_value = "random")]
    pub target: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Vector dimension; when set, runs the vector sweep instead.
    #[arg(long)]
    pub d: Option<usize>,
    /// Read the whole sweep configuration from a JSON file instead of
    /// flags (the other sweep flags are ignored).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or jsonl.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Args, Debug)]
pub struct CoverageArgs {
    /// Mesh widths to simulate (comma-separated).
    #[arg(long = "w", value_delimiter = ',', default_value = "64")]
    pub w: Vec<usize>,
    #[arg(long = "B", default_value_t = 1_000_000_000_000)]
    pub bound: i64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Failure probability in the coverage bound.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Records file (CSV or JSONL) produced by bench.
    pub input: PathBuf,
    #[arg(long, default_value = "mitm")]
    pub method: String,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub exponent: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `RSSP_SEED` overrides the command-line seed when set.
fn resolve_seed(cli_seed: u64) -> anyhow::Result<u64> {
    match std::env::var("RSSP_SEED") {
        Ok(v) => v
            .parse()
            .context("RSSP_SEED must be a 64-bit unsigned integer"),
        Err(_) => Ok(cli_seed),
    }
}

fn echo_config(config: &serde_json::Value) {
    eprintln!("{config}");
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Solve(args) => run_solve(args),
        Command::Bench(args) => run_bench(args),
        Command::Coverage(args) => run_coverage(args),
        Command::Fit(args) => run_fit(args),
    }
}

fn run_generate(args: GenerateArgs) -> anyhow::Result<()> {
    let spec = args.dist.to_spec()?;
    let seed = resolve_seed(args.seed)?;
    let target: TargetRule = args.target.parse()?;
    let config = json!({
        "command": "generate",
        "distribution": spec,
        "n": args.n,
        "target": target.to_string(),
        "seed": seed,
    });
    echo_config(&config);
    let inst = Instance::generate(&spec, args.n, target, seed)?;
    let output = json!({
        "items": inst.items,
        "B": inst.bound,
        "target": inst.target,
        "planted": inst.planted,
        "config": config,
    });
    write_json(&output, args.out.as_deref())
}

fn run_solve(args: SolveArgs) -> anyhow::Result<()> {
    let seed = resolve_seed(args.seed)?;
    let split: SplitRule = args.split.parse()?;
    let method: Method = args.method.parse()?;
    let target: TargetRule = args.target.parse()?;
    let dim = args.d.unwrap_or(1);

    if dim > 1 {
        if method != Method::Mitm {
            bail!("the vector path supports --method mitm only");
        }
        let vinst =
            VectorInstance::generate_uniform(dim, args.n, args.dist.bound, rssp_core::mix64(seed, 0))?;
        let config = json!({
            "command": "solve",
            "method": "vector_mitm",
            "d": dim,
            "B": args.dist.bound,
            "n": args.n,
            "w": args.w,
            "split": split.to_string(),
            "seed": seed,
            "n_left": split_point(args.n, args.w, split),
        });
        echo_config(&config);
        let start = Instant::now();
        let r = vector_mitm_solve(&vinst, args.w, split, rssp_core::mix64(seed, 1))?;
        let elapsed_ns = start.elapsed().as_nanos() as u64;
        let output = json!({
            "method": "vector_mitm",
            "best_total": r.best_total,
            "error": r.error,
            "error_sq": r.error_sq.to_string(),
            "elapsed_ns": elapsed_ns,
            "config": config,
        });
        return write_json(&output, args.out.as_deref());
    }

    let spec = args.dist.to_spec()?;
    let inst = Instance::generate(&spec, args.n, target, rssp_core::mix64(seed, 0))?;
    let solver_seed = rssp_core::mix64(seed, 1);
    let budget = args.budget.unwrap_or((args.n * args.w) as u64);
    let config = json!({
        "command": "solve",
        "method": method.tag(),
        "distribution": spec,
        "n": args.n,
        "w": args.w,
        "split": split.to_string(),
        "target": target.to_string(),
        "seed": seed,
        "k": args.k,
        "budget_evals": budget,
        "reconstruct": args.reconstruct,
        "n_left": split_point(args.n.max(2), args.w.max(1), split),
    });
    echo_config(&config);

    let start = Instant::now();
    let (best_total, error, subset): (serde_json::Value, serde_json::Value, Option<Vec<usize>>) =
        match method {
            Method::Mitm | Method::MitmEqui => {
                let variant = if method == Method::Mitm {
                    PhaseAVariant::BucketRandom
                } else {
                    PhaseAVariant::EquiSample
                };
                let out = mitm_solve_full(&inst, args.w, split, solver_seed, variant)?;
                if let Some(trace_path) = &args.trace {
                    crate::io::write_trace_jsonl(&out.result.trace, trace_path)?;
                }
                let subset = if args.reconstruct {
                    Some(mitm_reconstruct(&out)?)
                } else {
                    None
                };
                (json!(out.result.best_total), json!(out.result.error), subset)
            }
            Method::PlainBeam => {
                let (best, log) = forward_with_checkpoints(&inst.items, inst.target, args.w)?;
                let subset = if args.reconstruct {
                    Some(reconstruct_subset(&inst.items, inst.target, args.w, best, &log)?)
                } else {
                    None
                };
                (json!(best), json!(inst.error_of(best)), subset)
            }
            Method::BoundedMitm => {
                let k = args
                    .k
                    .unwrap_or_else(|| default_cardinality_budget(args.n, args.w));
                let r = bounded_mitm_solve(&inst, args.w, k, solver_seed)?;
                let subset = args.reconstruct.then_some(r.subset);
                (json!(r.result.best_total), json!(r.result.error), subset)
            }
            Method::Sa | Method::Ga | Method::Pso | Method::Tabu | Method::Aoa => {
                let params = match method {
                    Method::Sa => MetaheuristicParams::sa(budget),
                    Method::Ga => MetaheuristicParams::ga(budget),
                    Method::Pso => MetaheuristicParams::pso(budget),
                    Method::Tabu => MetaheuristicParams::tabu(budget),
                    _ => MetaheuristicParams::aoa(budget),
                };
                let sum = run_metaheuristic(&inst.items, inst.target, &params, solver_seed)?;
                (json!(sum), json!(inst.error_of(sum)), None)
            }
            Method::Fptas => {
                let sum = fptas_gens_levner(&inst.items, inst.target, args.eps.unwrap_or(0.1))?;
                (json!(sum), json!(inst.error_of(sum)), None)
            }
            Method::Exact => {
                let r = exact_min_error(&inst.items, inst.target)?;
                let best = rssp_core::instance::subset_sum(&inst.items, &r.witness)?;
                (json!(best), json!(r.min_error), args.reconstruct.then_some(r.witness))
            }
        };
    let elapsed_ns = start.elapsed().as_nanos() as u64;
    let mut output = json!({
        "method": method.tag(),
        "best_total": best_total,
        "error": error,
        "elapsed_ns": elapsed_ns,
        "config": config,
    });
    if let Some(subset) = subset {
        output["subset"] = json!(subset);
    }
    write_json(&output, args.out.as_deref())
}

fn run_bench(args: BenchArgs) -> anyhow::Result<()> {
    let seed = resolve_seed(args.seed)?;
    let format: OutputFormat = args.format.parse()?;
    let split: SplitRule = args.split.parse()?;

    let records = if let Some(path) = &args.config {
        let config = crate::experiments::load_sweep_config(path)?;
        echo_config(&serde_json::to_value(&config)?);
        run_sweep(&config)?
    } else if let Some(dim) = args.d {
        let config = VectorSweepConfig {
            dim,
            n: args.n,
            bound: args.dist.bound,
            trials: args.trials,
            w_grid: args.w_grid.clone(),
            split,
            master_seed: seed,
            parallelism: args.workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
            }),
        };
        echo_config(&serde_json::to_value(&config)?);
        run_vector_sweep(&config)?
    } else {
        let methods: anyhow::Result<Vec<Method>> =
            args.methods.iter().map(|m| m.parse()).collect();
        let mut config = SweepConfig::new(args.dist.to_spec()?, args.n, args.trials, args.w_grid.clone());
        config.split = split;
        config.target = args.target.parse()?;
        config.methods = methods?;
        config.master_seed = seed;
        if let Some(w) = args.workers {
            config.parallelism = w;
        }
        config.budget_evals = args.budget;
        config.k = args.k;
        config.fptas_eps = args.eps;
        echo_config(&serde_json::to_value(&config)?);
        run_sweep(&config)?
    };
    match &args.out {
        Some(path) => emit_records(&records, path, format)?,
        None => write_records(&records, &mut std::io::stdout().lock(), format)?,
    }
    Ok(())
}

fn run_coverage(args: CoverageArgs) -> anyhow::Result<()> {
    let seed = resolve_seed(args.seed)?;
    let config = json!({
        "command": "coverage",
        "w": args.w,
        "B": args.bound,
        "trials": args.trials,
        "delta": args.delta,
        "seed": seed,
    });
    echo_config(&config);
    let mut reports = Vec::new();
    for (i, &w) in args.w.iter().enumerate() {
        let report = phase_a_coverage_experiment(
            w,
            args.bound,
            args.trials,
            args.delta,
            rssp_core::mix64(seed, i as u64),
        )?;
        reports.push(json!({
            "w": report.width,
            "B": report.bound,
            "delta": report.delta,
            "trials": report.trials,
            "j_delta": report.j_delta,
            "exceed_count": report.exceed_count,
            "exceed_fraction": report.exceed_fraction,
            "median_iterations": report.quantile(0.5),
            "p90_iterations": report.quantile(0.9),
            "p99_iterations": report.quantile(0.99),
            "max_iterations": report.iterations.last(),
        }));
    }
    let output = json!({ "reports": reports, "config": config });
    write_json(&output, args.out.as_deref())
}

fn run_fit(args: FitArgs) -> anyhow::Result<()> {
    let records = read_records(&args.input)?;
    if records.is_empty() {
        bail!("no records in {}", args.input.display());
    }
    let rows = crate::experiments::aggregate(&records);
    let sample = records
        .iter()
        .find(|r| r.method == args.method)
        .with_context(|| format!("no rows for method {:?}", args.method))?;
    let config = json!({
        "command": "fit",
        "input": args.input.display().to_string(),
        "method": args.method,
        "exponent": args.exponent,
        "n": sample.n,
        "B": sample.bound,
    });
    echo_config(&config);
    let fit = fit_method(&rows, &args.method, args.exponent, sample.n, sample.bound)?;
    let output = json!({
        "fit": fit,
        "aggregate": rows.iter().filter(|r| r.method == args.method).collect::<Vec<_>>(),
        "config": config,
    });
    write_json(&output, args.out.as_deref())
}
