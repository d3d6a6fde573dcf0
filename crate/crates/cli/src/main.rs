//! `equiflock` command-line driver.
//!
//! Exit status: 0 on success, 2 when near-degenerate cells were left out of
//! the counts, 1 on any error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::Status;
use config::{resolve_offsets, RunConfig};
use equiflock::classify::DEFAULT_TOL;
use equiflock::pipeline::{MeshFormat, PebbleOptions};

#[derive(Debug, Parser)]
#[command(name = "equiflock", version, about = "Equilibrium flocks of discretized convex curves, surfaces and meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Grid offsets in [0, 1): one value or two comma-separated values.
    #[arg(long, value_delimiter = ',', num_args = 1..=2)]
    offsets: Vec<f64>,
    /// Seed for random offsets when --offsets is not given.
    #[arg(long)]
    seed: Option<u64>,
    /// Classification tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Reference point x,y,z (x,y for curves).
    #[arg(long, value_delimiter = ',', num_args = 2..=3)]
    origin: Vec<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Windowed flock counts of a built-in surface against the predictions.
    AnalyzeSurface {
        /// e.g. "ellipsoid 1.25 1.15 1" or "quadric-patch -1 0 -1 2".
        #[arg(long)]
        surface: String,
        #[arg(long)]
        n: usize,
        /// Window half-width in grid steps.
        #[arg(long = "K", default_value_t = 15)]
        k: usize,
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Flock counts of a built-in plane curve.
    AnalyzeCurve {
        /// e.g. "ellipse 2 1" or "circle 1".
        #[arg(long)]
        curve: String,
        #[arg(long)]
        n: usize,
        #[arg(long = "K", default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Running means of one flock's counts over a range of resolutions.
    Sweep {
        #[arg(long)]
        surface: String,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long = "K", default_value_t = 8)]
        k: usize,
        /// Which equilibrium of the surface to follow.
        #[arg(long, default_value_t = 0)]
        flock: usize,
        /// Continue from the rows already in the output CSV.
        #[arg(long)]
        resume: bool,
        /// Stop after this many new resolutions (checkpoint testing).
        #[arg(long, hide = true)]
        stop_after: Option<usize>,
        #[command(flatten)]
        common: Common,
        /// Output CSV; a JSON summary is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Hull, centroid, census and per-flock predictions of an OBJ/PLY mesh.
    AnalyzeMesh {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, value_parser = parse_format)]
        format: Option<MeshFormat>,
        /// Ring size of the curvature fit.
        #[arg(long, default_value_t = 2)]
        ring: usize,
        /// Largest edge distance between carriers of one flock.
        #[arg(long, default_value_t = 3)]
        hops: usize,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_format(s: &str) -> std::result::Result<MeshFormat, String> {
    match s.to_ascii_lowercase().as_str() {
        "obj" => Ok(MeshFormat::Obj),
        "ply" => Ok(MeshFormat::Ply),
        _ => Err(format!("unknown mesh format '{s}' (obj or ply)")),
    }
}

fn config(command: &str, common: &Common, out: PathBuf) -> Result<RunConfig> {
    let (offsets, offset_source) = resolve_offsets(&common.offsets, common.seed)?;
    let mut origin = [0.0; 3];
    origin[..common.origin.len()].copy_from_slice(&common.origin);
    Ok(RunConfig {
        command: command.into(),
        surface: None,
        curve: None,
        mesh: None,
        n: None,
        n_range: None,
        offsets,
        offset_source,
        k: None,
        tol: common.tol,
        origin,
        out,
        seed: common.seed,
    })
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::AnalyzeSurface { surface, n, k, common, out } => {
            let cfg = RunConfig { surface: Some(surface), n: Some(n), k: Some(k), ..config("analyze-surface", &common, out)? };
            cfg.validate()?;
            commands::analyze_surface(&cfg)
        }
        Command::AnalyzeCurve { curve, n, k, common, out } => {
            let cfg = RunConfig { curve: Some(curve), n: Some(n), k: Some(k), ..config("analyze-curve", &common, out)? };
            cfg.validate()?;
            commands::analyze_curve(&cfg)
        }
        Command::Sweep { surface, n_min, n_max, k, flock, resume, stop_after, common, out } => {
            let cfg = RunConfig { surface: Some(surface), n_range: Some((n_min, n_max)), k: Some(k), ..config("sweep", &common, out)? };
            cfg.validate()?;
            commands::sweep(&cfg, flock, resume, stop_after)
        }
        Command::AnalyzeMesh { mesh, format, ring, hops, common, out } => {
            let cfg = RunConfig { mesh: Some(mesh), ..config("analyze-mesh", &common, out)? };
            cfg.validate()?;
            commands::analyze_mesh(&cfg, format, PebbleOptions { ring, hop_threshold: hops, tol: cfg.tol })
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("EQUIFLOCK_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("EQUIFLOCK_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = std::panic::catch_unwind(|| init_threads().and_then(|_| run(cli)));
    match outcome {
        Ok(Ok(Status::Clean)) => ExitCode::SUCCESS,
        Ok(Ok(Status::Degenerate)) => {
            eprintln!("warning: near-degenerate cells were excluded from the counts");
            ExitCode::from(2)
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(1)
        }
    }
}
