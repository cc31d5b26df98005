//! `junction-lab`: runs junction experiments from config files.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod output;
mod plot;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use junction_core::ExecPolicy;

use config::Kind;
use error::CliResult;
use output::{Manifest, RunOutput, Status, Versions};
use run::RunContext;

const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Parser)]
#[command(
    name = "junction-lab",
    version,
    about = "Flux-limited Hamilton-Jacobi junction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named by the config's `kind`.
    Run(RunArgs),
    /// Solve one Cauchy problem and write the profiles.
    Cauchy(RunArgs),
    /// Tabulate the effective Hamiltonian of a periodic cell problem.
    EffectiveHamiltonian(RunArgs),
    /// Sweep truncation radii for the effective flux limiter.
    FluxLimiter(RunArgs),
    /// Measure homogenization errors over decreasing eps.
    EpsilonSweep(RunArgs),
    /// Run traffic-light checks on the effective flux limiter.
    TrafficChecks(RunArgs),
    /// Regenerate the plot tables of a finished run.
    PlotData {
        /// Run directory holding manifest.json.
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    /// Run directory; defaults to the config's output_dir, then
    /// <out-root>/<config stem>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root for run directories.
    #[arg(long, env = "JUNCTION_LAB_OUT", default_value = "runs")]
    out_root: PathBuf,
    /// Seed for randomized checks (default 20240917).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Override a tolerance, as NAME=VALUE. Repeatable.
    #[arg(long = "tol-override", value_parser = parse_override)]
    tol_override: Vec<(String, f64)>,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("{value:?}: {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (args, kind) = match cli.command {
        Command::Run(a) => (a, None),
        Command::Cauchy(a) => (a, Some(Kind::Cauchy)),
        Command::EffectiveHamiltonian(a) => (a, Some(Kind::EffectiveHamiltonian)),
        Command::FluxLimiter(a) => (a, Some(Kind::FluxLimiter)),
        Command::EpsilonSweep(a) => (a, Some(Kind::EpsilonSweep)),
        Command::TrafficChecks(a) => (a, Some(Kind::TrafficChecks)),
        Command::PlotData { run } => return plot_data(&run),
    };
    execute(&args, kind)
}

fn plot_data(dir: &Path) -> ExitCode {
    let result = plot::kind_of_run(dir).and_then(|kind| plot::emit_plot_data(dir, kind));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(args: &RunArgs, requested: Option<Kind>) -> ExitCode {
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let parsed = config::parse(&args.config);
    let parsed_ok = parsed.as_ref().ok();

    let stem = args
        .config
        .file_stem()
        .map_or_else(|| "run".into(), |s| s.to_os_string());
    let dir = args
        .out
        .clone()
        .or_else(|| parsed_ok.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| args.out_root.join(stem));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    let seed = args
        .seed
        .or_else(|| parsed_ok.and_then(|c| c.seed))
        .unwrap_or(DEFAULT_SEED);
    let jobs = args.jobs.map(|j| j as usize);

    let mut manifest = Manifest {
        versions: Versions {
            junction_lab: env!("CARGO_PKG_VERSION"),
            junction_core: junction_core::VERSION,
        },
        kind: requested
            .or_else(|| parsed_ok.and_then(|c| c.kind))
            .map(|k| k.to_string()),
        config_path: args.config.clone(),
        config: serde_json::Value::Null,
        seed,
        jobs,
        parallel: cfg!(feature = "parallel"),
        started_unix_s: started,
        wall_clock_s: 0.0,
        status: Status::Ok,
        error: None,
        checks: Vec::new(),
        artifacts: Vec::new(),
        results: Default::default(),
    };

    let result = parsed.and_then(|mut cfg| {
        cfg.tolerances.apply_overrides(&args.tol_override)?;
        manifest.config = serde_json::to_value(&cfg)?;
        let base = args.config.parent().unwrap_or(Path::new("."));
        let exp = cfg.build(requested, base)?;
        manifest.kind = Some(exp.kind.to_string());
        let policy = if jobs == Some(1) {
            ExecPolicy::Sequential
        } else {
            ExecPolicy::Parallel
        };
        let ctx = RunContext {
            dir: dir.clone(),
            seed,
            policy,
        };
        with_jobs(jobs, || run::run(&exp, &ctx))?
    });

    let code = match result {
        Ok(out) => {
            let failed = out.failed();
            for c in &out.checks {
                println!("{}", c.line());
            }
            let RunOutput {
                checks,
                artifacts,
                results,
            } = out;
            manifest.checks = checks;
            manifest.artifacts = artifacts;
            manifest.results = results;
            if failed {
                manifest.status = Status::ChecksFailed;
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            manifest.status = Status::Error;
            manifest.error = Some(e.to_string());
            ExitCode::from(2)
        }
    };
    manifest.wall_clock_s = clock.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(&dir) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(2);
    }
    println!("wrote {}", dir.display());
    code
}

#[cfg(feature = "parallel")]
fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> CliResult<R> {
    match jobs {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| error::CliError::config("jobs", e.to_string()))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<R>(jobs: Option<usize>, f: impl FnOnce() -> R) -> CliResult<R> {
    if jobs.is_some_and(|n| n > 1) {
        log::warn!("built without the parallel feature; --jobs is ignored");
    }
    Ok(f())
}
