use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use robust360_core::fov::empirical_fov_model;

use crate::io_formats as fmt;

#[derive(Args)]
pub struct CrowdArgs {
    /// Directory of `.head.csv` files (or a glob pattern).
    #[arg(long)]
    pub traces: String,
    #[arg(long)]
    pub config: PathBuf,
    /// Output model path (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(args: CrowdArgs) -> Result<()> {
    let config = fmt::load_config(&args.config)?;
    let paths = super::head_trace_paths(&args.traces)?;
    let traces: Vec<_> = paths
        .iter()
        .map(|p| super::read_head(p))
        .collect::<Result<_>>()?;
    let model = empirical_fov_model(&traces, &config)?;
    fmt::save_crowd_model(&model, &args.out)?;
    println!(
        "crowd model from {} traces over {} chunks -> {}",
        traces.len(),
        model.len(),
        args.out.display()
    );
    Ok(())
}
