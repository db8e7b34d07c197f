//! `robust360` — experiment runner for the tile-based streaming simulator.
//!
//! Subcommands: `run` (one session, writes decisions.csv + summary.json),
//! `sweep` (parameter sweeps over policies and seeds), `crowd-build`
//! (empirical viewport model from head traces), `oracle` (sandwich of
//! reference solvers on an instance file), and `synth-traces` (synthetic
//! bandwidth/head fixtures).
//!
//! Exit codes: 0 success, 1 simulation/solver failure, 2 bad input.

mod commands;
mod io_formats;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "robust360", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one streaming session and write its artifacts.
    Run(commands::run::RunArgs),
    /// Sweep a parameter axis over policies and seeds.
    Sweep(commands::sweep::SweepArgs),
    /// Build a crowd viewport model from a directory of head traces.
    CrowdBuild(commands::crowd::CrowdArgs),
    /// Print reference-solver bounds for a decision instance.
    Oracle(commands::oracle::OracleArgs),
    /// Generate synthetic bandwidth and head-movement traces.
    SynthTraces(commands::synth::SynthArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ROBUST360_LOG")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => commands::run::execute(args),
        Command::Sweep(args) => commands::sweep::execute(args),
        Command::CrowdBuild(args) => commands::crowd::execute(args),
        Command::Oracle(args) => commands::oracle::execute(args),
        Command::SynthTraces(args) => commands::synth::execute(args),
    };
    match outcome {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}

/// Input problems (missing files, parse errors, bad flags) exit 2; runtime
/// failures (simulation, solver) exit 1.
fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(core_err) = cause.downcast_ref::<robust360_core::Error>() {
            return match core_err {
                robust360_core::Error::Simulation { .. } | robust360_core::Error::Solver(_) => 1,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
    }
    2
}
