use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use condport_core::backtest::{run_backtest, write_report, BacktestConfig, ModelId};
use condport_core::data_io::{generate_synthetic, load_samples_csv, read_json, write_json, write_samples_csv, SyntheticConfig};
use condport_core::oracle::validation::run_validation;
use condport_core::reformulations::{route, Route};
use condport_core::{
    compute_geometry, eps_lower, rho_max, rho_min, solve_allocation, worst_case_value, Error, ProblemSpec, SolveOptions,
};

#[derive(Parser)]
#[command(name = "condport", version, about = "Conditional distributionally robust portfolio allocation")]
struct Cli {
    /// Solver tolerance (overrides config files).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print rho_min, rho_max and eps_lower for a spec.
    Feasibility(SpecArgs),
    /// Solve the allocation problem and write the allocation as JSON.
    Solve(SpecArgs),
    /// Evaluate the worst-case loss at a fixed (alpha, beta) and dump the dual certificate.
    WorstCase {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated portfolio weights.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        alpha: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Run the rolling-window backtest and write summary tables.
    Backtest(BacktestArgs),
    /// Generate a synthetic factor dataset as CSV.
    Synth(SynthArgs),
    /// Run the built-in oracle and LP cross-check suites.
    Validate {
        /// Fewer cases per suite.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct SpecArgs {
    /// Problem spec JSON.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Args)]
struct BacktestArgs {
    /// Backtest config JSON; missing fields take defaults.
    #[arg(long = "spec", alias = "config")]
    config: Option<PathBuf>,
    /// Sample CSV; a synthetic dataset is generated when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Synthetic generator config JSON, used when --data is absent.
    #[arg(long)]
    synth: Option<PathBuf>,
    /// Comma-separated model names; all models when absent.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    #[arg(long, default_value = "backtest-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    validation: Option<usize>,
    #[arg(long)]
    test: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator config JSON; missing fields take defaults.
    #[arg(long = "spec", alias = "config")]
    config: Option<PathBuf>,
    #[arg(long, default_value = "synthetic.csv")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    periods: Option<usize>,
    #[arg(long)]
    assets: Option<usize>,
}

fn load_spec(a: &SpecArgs) -> Result<ProblemSpec, Error> {
    let mut spec: ProblemSpec = read_json(&a.spec)?;
    if let Some(r) = a.rho {
        spec = spec.with_rho(r)?;
    }
    if let Some(e) = a.eps {
        spec = spec.with_eps(e)?;
    }
    if let Some(g) = a.gamma {
        spec = spec.with_gamma(g)?;
    }
    Ok(spec)
}

fn opts(tol: Option<f64>) -> SolveOptions {
    tol.map_or_else(SolveOptions::default, SolveOptions::with_tol)
}

/// Writes JSON to `out` (echoing the path) or prints it.
fn emit(out: Option<&Path>, value: &serde_json::Value) -> Result<(), Error> {
    match out {
        Some(p) => {
            write_json(p, value)?;
            println!("{}", p.display());
        }
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Singleton => "singleton",
        Route::Fiber => "fiber",
        Route::ReduceNullEps => "reduce_null_eps",
        Route::Uninformative => "uninformative",
        Route::TypeInfty => "type_infinity",
    }
}

fn feasibility(a: &SpecArgs) -> Result<(), Error> {
    let spec = load_spec(a)?;
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    let rmin = rho_min(&geo.kappa, spec.ambiguity.eps)?;
    let rmax = rho_max(&geo.d, &geo.i1);
    let elow = eps_lower(&geo.d, &geo.i1, spec.ambiguity.rho).ok();
    let r = route(&spec).ok().map(route_name);
    println!("rho_min={rmin:?}");
    println!("rho_max={rmax:?}");
    match elow {
        Some(e) => println!("eps_lower={e:?}"),
        None => println!("eps_lower=undefined"),
    }
    if let Some(p) = &a.out {
        let v = json!({ "rho_min": rmin, "rho_max": rmax, "eps_lower": elow, "route": r });
        write_json(p, &v)?;
        println!("{}", p.display());
    }
    Ok(())
}

fn solve(a: &SpecArgs, tol: Option<f64>) -> Result<(), Error> {
    let spec = load_spec(a)?;
    let alloc = solve_allocation(&spec, &opts(tol))?;
    emit(a.out.as_deref(), &serde_json::to_value(&alloc)?)
}

fn worst_case(a: &SpecArgs, alpha: &[f64], beta: f64, tol: Option<f64>) -> Result<(), Error> {
    let spec = load_spec(a)?;
    let (value, cert) = worst_case_value(alpha, beta, &spec, &opts(tol))?;
    let v = json!({ "value": value, "alpha": alpha, "beta": beta, "certificate": cert });
    emit(a.out.as_deref(), &v)
}

fn backtest(a: &BacktestArgs, tol: Option<f64>) -> Result<(), Error> {
    let mut cfg: BacktestConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => BacktestConfig::default(),
    };
    let overrides = [
        (a.replications, &mut cfg.replications),
        (a.pool_size, &mut cfg.pool_size),
        (a.window, &mut cfg.window),
        (a.validation, &mut cfg.validation),
        (a.test, &mut cfg.test),
        (a.jobs, &mut cfg.jobs),
    ];
    for (flag, field) in overrides {
        if let Some(v) = flag {
            *field = v;
        }
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = tol {
        cfg.tol = t;
    }
    let data = match &a.data {
        Some(p) => load_samples_csv(p)?,
        None => {
            let mut sc: SyntheticConfig = match &a.synth {
                Some(p) => read_json(p)?,
                None => SyntheticConfig {
                    periods: cfg.window + cfg.validation + cfg.test,
                    ..SyntheticConfig::default()
                },
            };
            if let Some(s) = a.seed {
                sc.seed = s;
            }
            generate_synthetic(&sc)?.samples
        }
    };
    let models: Vec<ModelId> = if a.models.is_empty() {
        ModelId::MV_FAMILY.iter().chain(&ModelId::CVAR_FAMILY).copied().collect()
    } else {
        a.models.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    let report = run_backtest(&models, &data, &cfg)?;
    for p in write_report(&report, &a.out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<(), Error> {
    let mut cfg: SyntheticConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => SyntheticConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.periods {
        cfg.periods = t;
    }
    if let Some(m) = a.assets {
        cfg.assets = m;
    }
    let data = generate_synthetic(&cfg)?;
    write_samples_csv(&a.out, &data.samples)?;
    println!("{}", a.out.display());
    Ok(())
}

/// Returns whether every suite passed.
fn validate(quick: bool) -> bool {
    let reports = run_validation(quick);
    for r in &reports {
        println!(
            "{} {}: {} cases, {} failures, max error {:.3e} (tol {:.0e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.failures,
            r.max_error,
            r.tolerance
        );
    }
    reports.iter().all(|r| r.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Feasibility(a) => feasibility(a),
        Command::Solve(a) => solve(a, cli.tol),
        Command::WorstCase { spec, alpha, beta } => worst_case(spec, alpha, *beta, cli.tol),
        Command::Backtest(a) => backtest(a, cli.tol),
        Command::Synth(a) => synth(a),
        Command::Validate { quick } => {
            return if validate(*quick) { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let v = json!({ "error": { "code": e.code(), "message": e.to_string() } });
            eprintln!("{v}");
            ExitCode::from(1)
        }
    }
}
