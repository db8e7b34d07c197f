use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use robust360_core::online::{simulate_session, Perturbations, Policy};

use crate::io_formats as fmt;

#[derive(Args)]
pub struct RunArgs {
    /// Scenario configuration (flat JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Bandwidth trace (`t_ms,mbps` CSV).
    #[arg(long)]
    pub bw_trace: PathBuf,
    /// The evaluated user's head trace (`t_ms,yaw,pitch,roll` CSV).
    #[arg(long)]
    pub head_trace: PathBuf,
    /// Crowd viewport model built with `crowd-build`.
    #[arg(long)]
    pub crowd_model: PathBuf,
    #[arg(long, default_value = "robust360")]
    pub policy: Policy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for decisions.csv and summary.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Config overrides.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Realized-bandwidth perturbation magnitude in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    pub bw_error: f64,
    /// Probability the policy sees the true viewport, in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub fov_fidelity: f64,
}

impl RunArgs {
    fn apply_overrides(&self, config: &mut robust360_core::StreamConfig) {
        if let Some(a) = self.alpha {
            config.alpha = a;
        }
        if let Some(e) = self.eta {
            config.eta_per_mbps = e;
        }
        if let Some(l) = self.lambda {
            config.lambda_per_s = l;
        }
        if let Some(w) = self.window {
            config.window_chunks = w;
        }
    }
}

pub fn execute(args: RunArgs) -> Result<()> {
    let mut config = fmt::load_config(&args.config)?;
    args.apply_overrides(&mut config);
    config.validate()?;

    let bw = super::read_bandwidth(&args.bw_trace)?;
    let head = super::read_head(&args.head_trace)?;
    let crowd = fmt::load_crowd_model(&args.crowd_model)?;
    let perturb = Perturbations {
        bw_error: args.bw_error,
        fov_fidelity: args.fov_fidelity,
    };

    let result = simulate_session(
        &config,
        &bw,
        &head,
        &crowd,
        args.policy,
        &perturb,
        args.seed,
    )?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    fmt::write_atomic(
        &args.out.join("decisions.csv"),
        fmt::decisions_csv(&result, &config).as_bytes(),
    )?;
    let summary = fmt::Summary::from_result(&result, args.policy, args.seed);
    fmt::write_atomic(
        &args.out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    println!(
        "{}: QoE {:.3}, stall {:.3} s, guaranteed rate (p95) {:.3} Mbps -> {}",
        args.policy,
        result.qoe_realized.total,
        result.stall_s,
        result.guaranteed_rate_p95,
        args.out.display()
    );
    Ok(())
}
