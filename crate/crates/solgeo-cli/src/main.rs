//! `solgeo` — batch experiment harness.
//!
//! Usage: `solgeo <command> --config FILE [--seed U64] [--workers N] [--out DIR]`
//! with the config read from stdin when `--config` is absent or `-`.
//! Writes `report.json` (plus `samples.csv` / `path.csv` when requested)
//! into the output directory and exits 0 iff every check passed.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use std::io::Read;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "solgeo", version, about = "Sol(p,q) geometry and diffusion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (JSON); `-` or absent reads stdin.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override worker count (default: run.workers, then $SOLGEO_WORKERS, then 1).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for report.json and CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Sample paths of the drifted diffusion; dump one as CSV.
    Simulate(Common),
    /// Coordinate central limit theorem at the configured horizon.
    Clt(Common),
    /// Rate-of-escape sandwich from the certified distance bounds.
    Escape(Common),
    /// Tail exponent of the transversal limit via the Hill estimator.
    Tails(Common),
    /// Log-scale deviation from the limit vertical geodesic.
    Deviation(Common),
    /// Boundary-piece classification of path endpoints.
    Boundary(Common),
    /// Eigenfunction residuals of the modified Poisson kernels.
    Harmonic(Common),
    /// Distance-bound sandwich on random points.
    Geometry(Common),
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Simulate(c) => ("simulate", c),
            Command::Clt(c) => ("clt", c),
            Command::Escape(c) => ("escape", c),
            Command::Tails(c) => ("tails", c),
            Command::Deviation(c) => ("deviation", c),
            Command::Boundary(c) => ("boundary", c),
            Command::Harmonic(c) => ("harmonic", c),
            Command::Geometry(c) => ("geometry", c),
        }
    }
}

/// Deterministic parallel map: results are collected in index order, so
/// the report bytes do not depend on the worker count.
pub(crate) fn pool_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

fn read_config_text(path: &Option<PathBuf>) -> std::io::Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p),
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            Ok(buf)
        }
    }
}

fn env_workers() -> Option<usize> {
    std::env::var("SOLGEO_WORKERS").ok()?.parse().ok()
}

fn main() {
    let cli = Cli::parse();
    let (name, common) = cli.command.split();
    std::process::exit(run(name, common));
}

fn run(name: &str, common: &Common) -> i32 {
    let text = match read_config_text(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config: {e}");
            return 2;
        }
    };
    let overrides = config::Overrides {
        seed: common.seed,
        workers: common.workers,
        out: common.out.clone(),
    };
    let cfg = match config::parse(&text, name, &overrides, env_workers()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.run.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: worker pool: {e}");
            return 1;
        }
    };
    let artifacts = match pool.install(|| commands::run(&cfg)) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    if let Err(e) = std::fs::create_dir_all(&cfg.output.dir) {
        eprintln!("error: cannot create output dir: {e}");
        return 1;
    }
    let report_path = cfg.output.dir.join("report.json");
    // The report body embeds the fully resolved experiment config (but
    // not runtime-only knobs like the worker count: bodies must be
    // byte-identical across worker counts).
    let json = match serde_json::to_value(&artifacts.report) {
        Ok(mut doc) => {
            if !cfg.options.is_null() {
                doc["options"] = cfg.options.clone();
            }
            doc["scheme"] = serde_json::json!(cfg.scheme);
            match serde_json::to_string_pretty(&doc) {
                Ok(j) => j,
                Err(e) => {
                    eprintln!("error: serializing report: {e}");
                    return 1;
                }
            }
        }
        Err(e) => {
            eprintln!("error: serializing report: {e}");
            return 1;
        }
    };
    if let Err(e) = std::fs::write(&report_path, json.as_bytes()) {
        eprintln!("error: writing {}: {e}", report_path.display());
        return 1;
    }

    if cfg.output.samples_csv {
        if let Some(samples) = &artifacts.samples {
            let mut buf = Vec::new();
            if samples.write_csv(&mut buf).is_ok() {
                let _ = std::fs::write(cfg.output.dir.join("samples.csv"), buf);
            }
        }
    }
    if cfg.output.path_csv {
        if let Some(path) = &artifacts.path {
            let mut buf = Vec::new();
            if path.write_csv(&mut buf).is_ok() {
                let _ = std::fs::write(cfg.output.dir.join("path.csv"), buf);
            }
        }
    }

    for r in &artifacts.report.reports {
        eprintln!(
            "{}: {} = {:.6} (threshold {:.6}) -> {}",
            artifacts.report.name,
            r.name,
            r.statistic,
            r.threshold,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    if artifacts.report.all_pass {
        0
    } else {
        1
    }
}
