//! `rlm`: run experiments from a TOML configuration.
//!
//! ```text
//! rlm converge -c converge.toml --mesh.global_levels=5
//! ```
//!
//! Any configuration key can be overridden with `--section.key=value`.
//! `RLM_THREADS` caps the worker threads used across seeds.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rlm_experiments::{run_experiment, Command, ExpError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "rlm", version, about = "Elasticity with immersed inclusions and reduced Lagrange multipliers")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Generate the mesh and inclusion layout and dump both.
    Mesh(RunArgs),
    /// Solve once with the configured boundary case.
    Solve(RunArgs),
    /// Convergence study against the axisymmetric solution.
    Converge(RunArgs),
    /// Multiplier mode content per inclusion.
    Modes(RunArgs),
    /// Effective moduli over the configured seeds.
    Effective(RunArgs),
    /// Boundary pressure over a range of compression strains.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; defaults apply to missing keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides of the form `--section.key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDE")]
    overrides: Vec<String>,
}

fn run(cli: Cli) -> Result<(), ExpError> {
    let (command, args) = match cli.command {
        Sub::Mesh(a) => (Command::Mesh, a),
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Converge(a) => (Command::Converge, a),
        Sub::Modes(a) => (Command::Modes, a),
        Sub::Effective(a) => (Command::Effective, a),
        Sub::Sweep(a) => (Command::Sweep, a),
    };
    if let Some(n) = std::env::var("RLM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // Fails only when the pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| ExpError::io(format!("reading {}", path.display()), e))?,
        None => String::new(),
    };
    let cfg = ExperimentConfig::from_toml(&text, &args.overrides)?;
    let out = run_experiment(&cfg, command)?;
    println!("{}", out.summary);
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rlm: {e}");
            ExitCode::FAILURE
        }
    }
}
