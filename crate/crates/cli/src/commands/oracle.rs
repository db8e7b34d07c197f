use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use robust360_core::model::RateLadder;
use robust360_core::oracle::{brute_force_discrete, grid_search_relaxed};
use robust360_core::quantize::{gap_bound, robust_quantize};
use robust360_core::relax::{build_lp, solve_relaxed};

use crate::io_formats as fmt;

#[derive(Args)]
pub struct OracleArgs {
    /// Instance file (JSON: `{instance: ..., ladder_mbps: [...]}`).
    #[arg(long)]
    pub instance: PathBuf,
    /// Grid-search step.
    #[arg(long, default_value_t = 0.005)]
    pub step: f64,
    /// Print the LP model before solving.
    #[arg(long)]
    pub dump_lp: bool,
}

pub fn execute(args: OracleArgs) -> Result<()> {
    let file = fmt::load_instance(&args.instance)?;
    let ladder = RateLadder::new(file.ladder_mbps.clone())?;
    let instance = file.instance;
    instance.validate()?;

    if args.dump_lp {
        println!("{}", build_lp(&instance)?.problem.dump());
    }

    let relaxed = solve_relaxed(&instance)?;
    let grid = grid_search_relaxed(&instance, args.step)?;
    let discrete = brute_force_discrete(&instance, &ladder)?;
    let quantized = robust_quantize(&relaxed.gamma, &ladder)?;
    let quantized_value = instance.objective_value(&quantized.gamma_final);
    let bound = gap_bound(&ladder, instance.count(), &instance.utility);

    println!(
        "relaxed LP objective      {:>12.6}   gamma* {:?}",
        relaxed.objective, relaxed.gamma
    );
    println!(
        "grid search (step {:.3})  {:>12.6}",
        args.step, grid.objective
    );
    println!(
        "discrete brute force      {:>12.6}   gamma {:?}",
        discrete.objective, discrete.gamma
    );
    println!(
        "quantized plan            {:>12.6}   gamma {:?}",
        quantized_value, quantized.gamma_final
    );
    println!("quantization gap bound    {:>12.6}", bound);
    println!(
        "sandwich: relaxed {} discrete {} quantized (gap {:.6} <= bound: {})",
        if relaxed.objective + 1e-6 >= discrete.objective {
            ">="
        } else {
            "<!"
        },
        if discrete.objective + 1e-6 >= quantized_value {
            ">="
        } else {
            "<!"
        },
        relaxed.objective - quantized_value,
        relaxed.objective - quantized_value <= bound + 1e-6,
    );
    Ok(())
}
