//! Reference policies. All three fetch spatially uniform chunks except
//! `full`, which upgrades only the tiles of the currently observed
//! viewport. Each operates on the same causal view as the window
//! controller, so comparisons share identical information.

use crate::error::Result;
use crate::fov::FovSet;
use crate::model::{StreamConfig, UtilitySpec};
use crate::online::{harmonic_mean_estimate, CausalView};
use crate::relax::RelaxedInstance;

/// Window instance with every tile of every chunk treated as covered, used
/// to replay candidate uniform schedules.
fn uniform_instance(
    view: &CausalView,
    config: &StreamConfig,
    window: usize,
) -> Result<RelaxedInstance> {
    let estimate = harmonic_mean_estimate(view.throughput, config.hm_samples)?;
    Ok(RelaxedInstance {
        first_chunk: view.chunk_index,
        alpha_card: vec![config.n_tiles(); window],
        n_tiles: config.n_tiles(),
        bandwidth: vec![estimate; window],
        rate_min: config.ladder_mbps.min_rate(),
        rate_max: config.ladder_mbps.max_rate(),
        lambda: config.lambda_per_s,
        eta: config.eta_per_mbps,
        utility: UtilitySpec::Linear,
        chunk_duration: config.chunk_duration_s,
        start_time: view.now,
        prev_play: view.prev_play,
        prev_gamma: view.prev_gamma,
        buffer_chunks: config.buffer_chunks,
        t_ini: config.startup_delay_s,
        stall_deadline: 0.0,
        prior_plays: view.prior_plays.to_vec(),
        utility_segments: 1,
    })
}

/// Uniform chunks with window lookahead: start the whole window at the
/// base rate, then sweep from the last chunk backward raising one level
/// wherever the replayed window finishes no later than the all-base
/// schedule; sweeps repeat until nothing changes.
pub fn ba1_window(view: &CausalView, config: &StreamConfig) -> Result<Vec<f64>> {
    let window = config
        .window_chunks
        .min(config.chunk_count - view.chunk_index);
    let instance = uniform_instance(view, config, window)?;
    let ladder = &config.ladder_mbps;
    let levels = ladder.levels();

    let mut rates = vec![ladder.min_rate(); window];
    let last_play = |rates: &[f64]| {
        let t = instance.window_timeline(rates);
        t.play[window - 1]
    };
    let budget = last_play(&rates);

    loop {
        let mut changed = false;
        for j in (0..window).rev() {
            let level = levels.iter().position(|&r| r == rates[j]).unwrap();
            if level + 1 >= levels.len() {
                continue;
            }
            let mut candidate = rates.clone();
            candidate[j] = levels[level + 1];
            if last_play(&candidate) <= budget + 1e-9 {
                rates = candidate;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(rates)
}

/// Commit the first window chunk of the BA1 sweep.
pub fn ba1_decide(view: &CausalView, config: &StreamConfig) -> Result<f64> {
    Ok(ba1_window(view, config)?[0])
}

/// Greedy uniform rate: the highest ladder level whose whole-chunk download
/// still meets the next play slot under the estimated bandwidth; the base
/// rate when nothing fits.
pub fn ba2_decide(view: &CausalView, config: &StreamConfig) -> Result<f64> {
    let estimate = harmonic_mean_estimate(view.throughput, config.hm_samples)?;
    let deadline = match view.prev_play {
        Some(p) => p + config.chunk_duration_s,
        None => config.startup_delay_s,
    };
    let slack = deadline - view.now;
    let n = config.n_tiles() as f64;
    let l = config.chunk_duration_s;
    Ok(config
        .ladder_mbps
        .levels()
        .iter()
        .rev()
        .copied()
        .find(|r| l * n * r / estimate <= slack + 1e-9)
        .unwrap_or_else(|| config.ladder_mbps.min_rate()))
}

/// Viewport-only upgrade: the currently observed viewport at the highest
/// deadline-feasible level (complement at base). Falls back to a uniform
/// full-chunk decision when no viewport has been observed yet.
pub fn full_decide(view: &CausalView, config: &StreamConfig) -> Result<(f64, FovSet)> {
    let all_tiles = FovSet::from_iter(0..config.n_tiles());
    let viewport = view.current_fov.cloned().unwrap_or(all_tiles);
    let estimate = harmonic_mean_estimate(view.throughput, config.hm_samples)?;
    let deadline = match view.prev_play {
        Some(p) => p + config.chunk_duration_s,
        None => config.startup_delay_s,
    };
    let slack = deadline - view.now;
    let l = config.chunk_duration_s;
    let v = viewport.len() as f64;
    let rest = (config.n_tiles() - viewport.len()) as f64;
    let r0 = config.ladder_mbps.min_rate();
    let rate = config
        .ladder_mbps
        .levels()
        .iter()
        .rev()
        .copied()
        .find(|r| l * (v * r + rest * r0) / estimate <= slack + 1e-9)
        .unwrap_or(r0);
    Ok((rate, viewport))
}
