//! `arbiter` command-line tool: grid study, planar demo, statistics, single
//! trials and the HTTP session service.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 bad configuration, arguments or
//! missing input file, 3 input schema mismatch, 4 cannot bind the service
//! address.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use arbiter_core::arbitration::PolicyKind;
use arbiter_core::config::ArbiterConfig;
use arbiter_core::engine::{run_demo2d, run_grid, run_trial, GridResult};
use arbiter_core::io::{
    cell_rows, demo_summary, json_bytes, read_grid_csv, stat_rows, write_cells_csv, write_grid_csv, write_stats_csv,
    write_trace_csv, OutputDir, RunManifest,
};
use arbiter_core::service::{self, SessionRegistry};
use arbiter_core::stats::Thresholds;
use arbiter_core::Error;

#[derive(Parser)]
#[command(name = "arbiter", version, about = "Uncertainty-aware shared-control arbitration study")]
struct Cli {
    /// TOML configuration file; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo study over every policy and uncertainty cell.
    RunGrid(RunGridArgs),
    /// Run the planar three-policy illustration.
    Demo2d(OutArgs),
    /// Recompute cell summaries and U tests from a grid.csv.
    Stats(StatsArgs),
    /// Simulate one trial and write its trace.
    Trial(TrialArgs),
    /// Serve the HTTP session API until interrupted.
    Serve(ServeArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Master seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunGridArgs {
    #[command(flatten)]
    out: OutArgs,
    /// Number of simulation sets; each set runs every target once per cell.
    #[arg(long, default_value_t = 100)]
    sets: u32,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Significance cut-offs: `simulation`, `experiment` or `HIGH,MODERATE`.
    #[arg(long, default_value = "simulation", value_parser = parse_thresholds)]
    thresholds: Thresholds,
}

#[derive(Args)]
struct StatsArgs {
    /// grid.csv produced by run-grid.
    grid: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "simulation", value_parser = parse_thresholds)]
    thresholds: Thresholds,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    out: OutArgs,
    #[arg(long, default_value = "bell", value_parser = parse_policy)]
    policy: PolicyKind,
    #[arg(long, default_value_t = 0)]
    intent_level: u8,
    #[arg(long, default_value_t = 0)]
    autonomy_level: u8,
    /// Index of the true target in the scene.
    #[arg(long, default_value_t = 0)]
    target: usize,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: String,
}

fn parse_thresholds(s: &str) -> Result<Thresholds, String> {
    let t = match s.to_ascii_lowercase().as_str() {
        "simulation" => Thresholds::SIMULATION,
        "experiment" => Thresholds::EXPERIMENT,
        other => {
            let (h, m) = other.split_once(',').ok_or("expected simulation, experiment or HIGH,MODERATE")?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
            Thresholds { high: parse(h)?, moderate: parse(m)? }
        }
    };
    t.validate().map_err(|e| e.to_string())?;
    Ok(t)
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::InvalidParameter { .. } | Error::InvalidScene(_) => 2,
            Error::Schema(_) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult = Result<(), Failure>;

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ArbiterConfig, Error> {
    let mut cfg = match path {
        Some(p) => ArbiterConfig::load(p)?,
        None => ArbiterConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.sim.seed = seed;
        cfg.demo.seed = seed;
    }
    Ok(cfg)
}

fn write_grid_outputs(out: &mut OutputDir, grid: &GridResult, thresholds: Thresholds) -> Result<(), Error> {
    out.write("cells.csv", &write_cells_csv(&cell_rows(grid))?)?;
    out.write("stats.csv", &write_stats_csv(&stat_rows(grid, thresholds)?)?)?;
    Ok(())
}

fn cmd_run_grid(config: Option<&Path>, args: RunGridArgs) -> CliResult {
    let cfg = load_config(config, args.out.seed)?;
    let exp = cfg.resolve()?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: 1, message: e.to_string() })?;
    }
    log::info!("running {} sets on {} threads", args.sets, rayon::current_num_threads());
    let grid = run_grid(&exp, args.sets, &PolicyKind::ALL, &exp.all_settings())?;
    let grid_bytes = write_grid_csv(&grid.rows)?;
    // Summaries come from the persisted rows so `stats` on grid.csv reproduces them exactly.
    let persisted = GridResult::from_rows(args.sets, read_grid_csv(grid_bytes.as_slice())?);

    let manifest = RunManifest::new("run-grid", Some(cfg.sim.seed), Some(args.sets), cfg.to_toml_string())
        .param("thresholds", format!("{},{}", args.thresholds.high, args.thresholds.moderate));
    let mut out = OutputDir::create(&args.out.out, manifest)?;
    out.write("grid.csv", &grid_bytes)?;
    write_grid_outputs(&mut out, &persisted, args.thresholds)?;
    out.finish()?;
    println!("wrote {} trials to {}", grid.rows.len(), args.out.out.display());
    Ok(())
}

fn cmd_demo2d(config: Option<&Path>, args: OutArgs) -> CliResult {
    let cfg = load_config(config, args.seed)?;
    let exp = cfg.resolve()?;
    let demo = run_demo2d(&exp, &cfg.demo)?;
    let manifest = RunManifest::new("demo2d", Some(cfg.demo.seed), None, cfg.to_toml_string());
    let mut out = OutputDir::create(&args.out, manifest)?;
    for trace in &demo.traces {
        out.write(&format!("trace_{}.csv", trace.meta.policy), &write_trace_csv(trace, exp.sim.dt)?)?;
    }
    let summary = demo_summary(&demo);
    out.write("demo_summary.json", &json_bytes(&summary)?)?;
    out.finish()?;
    for p in &summary.policies {
        println!("{:<9} {:<17} {:>6.2} s", p.policy.as_str(), p.status.as_str(), p.duration_s);
    }
    Ok(())
}

fn cmd_stats(config: Option<&Path>, args: StatsArgs) -> CliResult {
    let file = File::open(&args.grid)
        .map_err(|e| Failure { code: 2, message: format!("cannot read {}: {e}", args.grid.display()) })?;
    let rows = read_grid_csv(file).map_err(|e| match e {
        Error::Schema(msg) => Error::Schema(format!("{}: {msg}", args.grid.display())),
        other => other,
    })?;
    let sets = rows.iter().map(|r| r.set_id + 1).max().unwrap_or(0);
    let grid = GridResult::from_rows(sets, rows);
    let cfg = load_config(config, None)?;
    let manifest = RunManifest::new("stats", None, Some(sets), cfg.to_toml_string())
        .param("grid", args.grid.display())
        .param("thresholds", format!("{},{}", args.thresholds.high, args.thresholds.moderate));
    let mut out = OutputDir::create(&args.out, manifest)?;
    write_grid_outputs(&mut out, &grid, args.thresholds)?;
    out.finish()?;
    println!("wrote cells.csv and stats.csv to {}", args.out.display());
    Ok(())
}

fn cmd_trial(config: Option<&Path>, args: TrialArgs) -> CliResult {
    let cfg = load_config(config, args.out.seed)?;
    let exp = cfg.resolve()?;
    let setting = exp.setting(args.intent_level, args.autonomy_level)?;
    let seed = cfg.sim.seed;
    let record = run_trial(&exp, args.target, args.policy, setting, seed)?;
    let manifest = RunManifest::new("trial", Some(seed), None, cfg.to_toml_string())
        .param("policy", args.policy)
        .param("intent_level", args.intent_level)
        .param("autonomy_level", args.autonomy_level)
        .param("target", args.target);
    let mut out = OutputDir::create(&args.out.out, manifest)?;
    out.write("trace.csv", &write_trace_csv(&record, exp.sim.dt)?)?;
    out.write("outcome.json", &json_bytes(&record.outcome)?)?;
    out.finish()?;
    let o = record.outcome;
    println!(
        "{} {} after {:.2} s (mean helpfulness {:.3}, mean friendliness {:.3})",
        args.policy, o.status, o.duration_s, o.mean_h, o.mean_f
    );
    Ok(())
}

fn cmd_serve(config: Option<&Path>, args: ServeArgs) -> CliResult {
    let exp = load_config(config, None)?.resolve()?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure { code: 1, message: e.to_string() })?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.bind)
            .await
            .map_err(|e| Failure { code: 4, message: format!("cannot bind {}: {e}", args.bind) })?;
        let addr = listener.local_addr().map_err(|e| Failure { code: 4, message: e.to_string() })?;
        println!("listening on http://{addr}");
        log::info!("listening on http://{addr}");
        let registry = Arc::new(SessionRegistry::new(exp));
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        service::serve(listener, registry, shutdown).await.map_err(|e| Failure { code: 1, message: e.to_string() })
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARBITER_LOG", "info")).init();
    let cli = Cli::parse();
    let config = cli.config.as_deref();
    let result = match cli.command {
        Command::RunGrid(a) => cmd_run_grid(config, a),
        Command::Demo2d(a) => cmd_demo2d(config, a),
        Command::Stats(a) => cmd_stats(config, a),
        Command::Trial(a) => cmd_trial(config, a),
        Command::Serve(a) => cmd_serve(config, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
