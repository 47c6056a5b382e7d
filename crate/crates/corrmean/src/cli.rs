//! Command-line front end: the verification suite, config-driven task
//! runs, and the correlation sweep, with CSV on stdout (or --out) and
//! human-readable summaries on stderr.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{load_task_config, DataSpec, ResolvedTask, SplitKind};
use crate::data::{
    load_csv, load_idx, split_holdout, split_iid, split_noniid, synth_gaussian_mixture, Dataset,
};
use crate::error::{Error, Result};
use crate::oracle::DEFAULT_PATTERN_LIMIT;
use crate::report::{write_metrics_csv, write_sweep_csv};
use crate::tasks::kmeans::kmeans_sim;
use crate::tasks::logreg::logreg_sim;
use crate::tasks::power_iteration::power_iteration_sim;
use crate::tasks::quadratic::quadratic_case_study;
use crate::tasks::sweep::{r2r1_sweep, SweepConfig};
use crate::types::RoundMetrics;
use crate::verify::{run_all, VerifyOptions};

#[derive(Debug, Parser)]
#[command(
    name = "corrmean",
    about = "Correlation-aware sparsified mean estimation: verification, task runs, sweeps"
)]
struct Cli {
    /// Worker thread cap (default: CORRMEAN_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the analytic-versus-oracle self-check suite.
    Verify {
        /// Largest enumeration size before falling back to Monte Carlo.
        #[arg(long, default_value_t = DEFAULT_PATTERN_LIMIT)]
        grid_max_patterns: u64,
        /// Master seed for the generated check instances.
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run a configured task and emit per-round metrics CSV.
    Task {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Master seed override (wins over the config value).
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Walk the correlation range and measure every estimator by Monte
    /// Carlo at each sign configuration.
    Sweep {
        /// Node count (must be even).
        #[arg(long)]
        n: usize,
        /// Vector dimension.
        #[arg(long)]
        d: usize,
        /// Coordinate budget per message.
        #[arg(long)]
        k: usize,
        /// Monte Carlo trials per configuration.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    let count = match threads {
        Some(count) => Some(count),
        None => match std::env::var("CORRMEAN_THREADS") {
            Ok(value) => Some(value.parse().map_err(|_| {
                Error::Config(format!(
                    "CORRMEAN_THREADS must be a positive integer, got {value:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(count) = count {
        if count == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        // A second build in the same process keeps the first pool; that
        // only happens in tests driving run() twice.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build_global();
    }
    Ok(())
}

fn build_dataset(spec: &DataSpec, seed: u64) -> Result<Dataset> {
    match spec {
        DataSpec::Mixture {
            rows,
            features,
            components,
            separation,
        } => synth_gaussian_mixture(*rows, *features, *components, *separation, seed),
        DataSpec::Idx { images, labels } => load_idx(images, labels),
        DataSpec::Csv { path } => load_csv(path),
    }
}

fn split_dataset(
    data: &Dataset,
    kind: SplitKind,
    nodes: usize,
    seed: u64,
) -> Result<Vec<Dataset>> {
    match kind {
        SplitKind::Iid => split_iid(data, nodes, seed),
        SplitKind::NonIid => split_noniid(data, nodes, seed),
    }
}

fn run_task(resolved: &ResolvedTask) -> Result<(Vec<RoundMetrics>, String)> {
    match resolved {
        ResolvedTask::PowerIteration {
            cfg,
            nodes,
            data,
            split,
        } => {
            let dataset = build_dataset(data, cfg.seed)?;
            let parts = split_dataset(&dataset, *split, *nodes, cfg.seed)?;
            let metrics = power_iteration_sim(cfg, &parts)?;
            Ok((metrics, format!("power_iteration: {nodes} nodes")))
        }
        ResolvedTask::KMeans {
            cfg,
            nodes,
            data,
            split,
        } => {
            let dataset = build_dataset(data, cfg.seed)?;
            let parts = split_dataset(&dataset, *split, *nodes, cfg.seed)?;
            let metrics = kmeans_sim(cfg, &parts)?;
            Ok((metrics, format!("kmeans: {nodes} nodes, {} clusters", cfg.clusters)))
        }
        ResolvedTask::LogReg {
            cfg,
            nodes,
            data,
            split,
            holdout_fraction,
        } => {
            let dataset = build_dataset(data, cfg.seed)?;
            let (train, test) = match holdout_fraction {
                Some(fraction) => {
                    let (train, test) = split_holdout(&dataset, *fraction, cfg.seed)?;
                    (train, Some(test))
                }
                None => (dataset, None),
            };
            let parts = split_dataset(&train, *split, *nodes, cfg.seed)?;
            let metrics = logreg_sim(cfg, &parts, test.as_ref())?;
            Ok((metrics, format!("logreg: {nodes} nodes, {} classes", cfg.classes)))
        }
        ResolvedTask::Quadratic { cfg } => {
            let (metrics, _) = quadratic_case_study(cfg)?;
            Ok((
                metrics,
                format!("quadratic: {} nodes, dim {}", cfg.nodes, cfg.dim),
            ))
        }
    }
}

fn write_csv_to(out: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            write(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn cmd_verify(grid_max_patterns: u64, seed: u64) -> i32 {
    let opts = VerifyOptions {
        max_patterns: grid_max_patterns,
        seed,
    };
    let checks = run_all(&opts);
    let mut failed = 0usize;
    for check in &checks {
        let tag = if check.passed { "[PASS]" } else { "[FAIL]" };
        println!("{tag} {}: {}", check.name, check.detail);
        if !check.passed {
            failed += 1;
        }
    }
    println!("verify: {} checks, {failed} failed", checks.len());
    i32::from(failed > 0)
}

fn cmd_task(config: &PathBuf, seed: Option<u64>, out: &Option<PathBuf>) -> Result<()> {
    let resolved = load_task_config(config, seed)?;
    let (metrics, summary) = run_task(&resolved)?;
    write_csv_to(out, |w| write_metrics_csv(w, &metrics))?;
    let last = metrics.last().expect("at least one round");
    eprintln!(
        "{summary}; {} rounds, final task_loss {:e}, final est_mse {:e}",
        metrics.len(),
        last.task_loss,
        last.est_mse
    );
    Ok(())
}

fn cmd_sweep(cfg: &SweepConfig, out: &Option<PathBuf>) -> Result<()> {
    let points = r2r1_sweep(cfg)?;
    write_csv_to(out, |w| write_sweep_csv(w, &points))?;
    eprintln!(
        "sweep: {} configurations, {} points, rho {:e} to {:e}",
        points.len() / 4,
        points.len(),
        points.first().map_or(f64::NAN, |p| p.rho),
        points.last().map_or(f64::NAN, |p| p.rho)
    );
    Ok(())
}

/// Parses arguments from the environment, runs the chosen command, and
/// returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return 2;
    }
    let outcome = match &cli.command {
        Command::Verify {
            grid_max_patterns,
            seed,
        } => return cmd_verify(*grid_max_patterns, *seed),
        Command::Task { config, seed, out } => cmd_task(config, *seed, out),
        Command::Sweep {
            n,
            d,
            k,
            trials,
            seed,
            out,
        } => cmd_sweep(
            &SweepConfig {
                nodes: *n,
                dim: *d,
                k: *k,
                trials: *trials,
                seed: *seed,
            },
            out,
        ),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
