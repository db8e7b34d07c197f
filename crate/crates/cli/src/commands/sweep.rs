use std::path::PathBuf;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::Args;

use robust360_core::fov::FovModel;
use robust360_core::online::{simulate_session, Perturbations, Policy};
use robust360_core::StreamConfig;

use crate::io_formats as fmt;

/// Which scenario knob the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    Eta,
    Window,
    #[value(alias = "bw_error")]
    BwError,
    #[value(alias = "fov_fidelity")]
    FovFidelity,
    Alpha,
}

impl Axis {
    fn name(&self) -> &'static str {
        match self {
            Axis::Eta => "eta",
            Axis::Window => "window",
            Axis::BwError => "bw_error",
            Axis::FovFidelity => "fov_fidelity",
            Axis::Alpha => "alpha",
        }
    }

    fn apply(&self, value: f64, config: &mut StreamConfig, perturb: &mut Perturbations) {
        match self {
            Axis::Eta => config.eta_per_mbps = value,
            Axis::Window => config.window_chunks = value.round() as usize,
            Axis::BwError => perturb.bw_error = value,
            Axis::FovFidelity => perturb.fov_fidelity = value,
            Axis::Alpha => config.alpha = value,
        }
    }
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated axis values.
    #[arg(long)]
    pub values: String,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub bw_trace: PathBuf,
    /// Head traces of the evaluated users (glob or directory).
    #[arg(long)]
    pub eval_glob: String,
    /// Prebuilt crowd model; alternatively give --crowd-glob.
    #[arg(long)]
    pub crowd_model: Option<PathBuf>,
    /// Head traces to build the crowd model from (glob or directory).
    #[arg(long)]
    pub crowd_glob: Option<String>,
    /// Comma-separated policies.
    #[arg(long, default_value = "robust360,ba1,ba2,full")]
    pub policies: String,
    /// Seeds: comma list (`1,2,3`) or range (`0..20`).
    #[arg(long, default_value = "0..5")]
    pub seeds: String,
    /// Parallel sessions.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// One sweep cell: a (policy, value, seed) triple averaged over the
/// evaluated users.
struct Cell {
    policy: Policy,
    value: f64,
    seed: u64,
}

#[derive(Clone, Default)]
struct Metrics {
    users: usize,
    qoe: f64,
    qoe_utility: f64,
    qoe_stall_penalty: f64,
    qoe_variation_penalty: f64,
    robust_qoe: f64,
    stall_s: f64,
    guaranteed_rate_p95: f64,
    mean_gamma: f64,
    mean_decision_ms: f64,
}

pub fn execute(args: SweepArgs) -> Result<()> {
    let base_config = fmt::load_config(&args.config)?;
    let bw = super::read_bandwidth(&args.bw_trace)?;
    let eval_paths = super::head_trace_paths(&args.eval_glob)?;
    let eval_traces: Vec<_> = eval_paths
        .iter()
        .map(|p| super::read_head(p))
        .collect::<Result<_>>()?;

    let crowd: FovModel = match (&args.crowd_model, &args.crowd_glob) {
        (Some(path), _) => fmt::load_crowd_model(path)?,
        (None, Some(pattern)) => {
            let traces: Vec<_> = super::head_trace_paths(pattern)?
                .iter()
                .map(|p| super::read_head(p))
                .collect::<Result<_>>()?;
            robust360_core::fov::empirical_fov_model(&traces, &base_config)?
        }
        (None, None) => bail!("need --crowd-model or --crowd-glob"),
    };

    let values: Vec<f64> = args
        .values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad value {v:?}"))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("need at least one axis value");
    }
    let policies: Vec<Policy> = args
        .policies
        .split(',')
        .map(|p| Ok(p.trim().parse::<Policy>()?))
        .collect::<Result<_>>()?;
    let seeds = super::parse_seeds(&args.seeds)?;

    let mut cells = Vec::new();
    for &policy in &policies {
        for &value in &values {
            for &seed in &seeds {
                cells.push(Cell {
                    policy,
                    value,
                    seed,
                });
            }
        }
    }

    // Independent sessions, a simple shared-counter pool, results keyed by
    // cell index so output order never depends on scheduling.
    let results: Vec<Mutex<Option<Result<Metrics>>>> =
        cells.iter().map(|_| Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let jobs = args.jobs.max(1).min(cells.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if idx >= cells.len() {
                    break;
                }
                let cell = &cells[idx];
                let outcome = run_cell(cell, &args.axis, &base_config, &bw, &eval_traces, &crowd);
                *results[idx].lock().unwrap() = Some(outcome);
            });
        }
    });

    let axis = args.axis.name();
    let mut sweep_csv = String::from(
        "policy,axis,value,seed,users,qoe,qoe_utility,qoe_stall_penalty,qoe_variation_penalty,robust_qoe,stall_s,guaranteed_rate_p95,mean_gamma,mean_decision_ms\n",
    );
    let mut rows: Vec<(usize, Metrics)> = Vec::with_capacity(cells.len());
    for (idx, slot) in results.iter().enumerate() {
        let metrics = slot
            .lock()
            .unwrap()
            .take()
            .expect("cell not executed")
            .with_context(|| {
                format!(
                    "cell policy={} {}={} seed={}",
                    cells[idx].policy, axis, cells[idx].value, cells[idx].seed
                )
            })?;
        rows.push((idx, metrics));
    }
    for (idx, m) in &rows {
        let cell = &cells[*idx];
        sweep_csv.push_str(&format!(
            "{},{axis},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3}\n",
            cell.policy,
            cell.value,
            cell.seed,
            m.users,
            m.qoe,
            m.qoe_utility,
            m.qoe_stall_penalty,
            m.qoe_variation_penalty,
            m.robust_qoe,
            m.stall_s,
            m.guaranteed_rate_p95,
            m.mean_gamma,
            m.mean_decision_ms,
        ));
    }

    // Aggregate over seeds per (policy, value).
    let mut agg_csv = String::from(
        "policy,axis,value,seeds,qoe_mean,qoe_std,robust_qoe_mean,robust_qoe_std,stall_mean,stall_std,guaranteed_rate_p95_mean,guaranteed_rate_p95_std,decision_ms_mean\n",
    );
    for &policy in &policies {
        for &value in &values {
            let group: Vec<&Metrics> = rows
                .iter()
                .filter(|(idx, _)| cells[*idx].policy == policy && cells[*idx].value == value)
                .map(|(_, m)| m)
                .collect();
            let stat = |f: &dyn Fn(&Metrics) -> f64| mean_std(group.iter().map(|m| f(m)));
            let (qm, qs) = stat(&|m| m.qoe);
            let (rm, rs) = stat(&|m| m.robust_qoe);
            let (sm, ss) = stat(&|m| m.stall_s);
            let (gm, gs) = stat(&|m| m.guaranteed_rate_p95);
            let (dm, _) = stat(&|m| m.mean_decision_ms);
            agg_csv.push_str(&format!(
                "{policy},{axis},{value},{},{qm:.6},{qs:.6},{rm:.6},{rs:.6},{sm:.6},{ss:.6},{gm:.6},{gs:.6},{dm:.3}\n",
                group.len(),
            ));
        }
    }

    std::fs::create_dir_all(&args.out)?;
    fmt::write_atomic(&args.out.join("sweep.csv"), sweep_csv.as_bytes())?;
    fmt::write_atomic(&args.out.join("agg.csv"), agg_csv.as_bytes())?;
    println!(
        "swept {} over {:?}: {} cells x {} users -> {}",
        axis,
        values,
        cells.len(),
        eval_traces.len(),
        args.out.display()
    );
    Ok(())
}

fn run_cell(
    cell: &Cell,
    axis: &Axis,
    base_config: &StreamConfig,
    bw: &robust360_core::BandwidthTrace,
    eval_traces: &[robust360_core::HeadTrace],
    crowd: &FovModel,
) -> Result<Metrics> {
    let mut config = base_config.clone();
    let mut perturb = Perturbations::default();
    axis.apply(cell.value, &mut config, &mut perturb);
    config.validate()?;

    let mut m = Metrics {
        users: eval_traces.len(),
        ..Metrics::default()
    };
    for head in eval_traces {
        let r = simulate_session(&config, bw, head, crowd, cell.policy, &perturb, cell.seed)?;
        let k = r.committed_gamma.len() as f64;
        m.qoe += r.qoe_realized.total;
        m.qoe_utility += r.qoe_realized.utility_sum;
        m.qoe_stall_penalty += r.qoe_realized.stall_penalty;
        m.qoe_variation_penalty += r.qoe_realized.variation_penalty;
        m.robust_qoe += r.qoe_robust.total;
        m.stall_s += r.stall_s;
        m.guaranteed_rate_p95 += r.guaranteed_rate_p95;
        m.mean_gamma += r.committed_gamma.iter().sum::<f64>() / k;
        m.mean_decision_ms += r.mean_decision_ms();
    }
    let n = eval_traces.len() as f64;
    m.qoe /= n;
    m.qoe_utility /= n;
    m.qoe_stall_penalty /= n;
    m.qoe_variation_penalty /= n;
    m.robust_qoe /= n;
    m.stall_s /= n;
    m.guaranteed_rate_p95 /= n;
    m.mean_gamma /= n;
    m.mean_decision_ms /= n;
    Ok(m)
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let values: Vec<f64> = values.collect();
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
