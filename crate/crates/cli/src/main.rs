//! Scenario-driven front end: loads a TOML config, dispatches to the
//! numerical toolkit, and writes CSV/JSON reports.
//!
//! Exit codes: 0 success, 1 config/validation error, 2 numerical failure
//! (with the failing context recorded in `error.json`).

mod config;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "axiflow",
    version,
    about = "Lagrangian diagnostics for pulsatile axisymmetric pipe flow"
)]
struct Cli {
    /// Scenario configuration (TOML).
    #[arg(long, env = "AXIFLOW_CONFIG")]
    config: PathBuf,

    /// Output directory (created if missing).
    #[arg(long, env = "AXIFLOW_OUT")]
    out: PathBuf,

    /// Worker threads for grid-parallel stages (default: all cores).
    #[arg(long, env = "AXIFLOW_THREADS")]
    threads: Option<usize>,

    #[arg(long, short)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Sample the field, its divergence and the exact-Euler certification.
    Fields,
    /// Integrate particle trajectories from the configured seeds.
    Trace,
    /// Build the streamline map and the laminar-rates table.
    Atlas,
    /// Frenet frames along a trajectory.
    Frames,
    /// Pressure identities and the rotation balance along a trajectory.
    Identities,
    /// Inflow-condition instability scan.
    Scan,
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("axiflow: could not size the thread pool: {e}");
        }
    }
    std::process::exit(run::run(&cli));
}
