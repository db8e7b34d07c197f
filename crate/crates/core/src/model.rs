//! Scenario configuration, the rate ladder, download/playback timeline
//! equations, and the QoE functional.
//!
//! Time bookkeeping convention: a session downloads chunks `1..=K`
//! back-to-back. Chunk `k` starts downloading at `start[k-1]` (so
//! `start[0] = 0`), finishes after `size_k / C_k` seconds, then the player
//! may wait `wait[k-1]` seconds before starting chunk `k+1` — the wait is
//! nonzero only when the playback buffer is full. `start[k]` is therefore
//! both "chunk k finished + wait" and "chunk k+1 begins".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::TIME_EPS;

/// The discrete per-tile encoding rates, strictly increasing, in Mbps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RateLadder {
    levels: Vec<f64>,
}

impl RateLadder {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::invalid("rate ladder needs at least two levels"));
        }
        if levels[0] <= 0.0 {
            return Err(Error::invalid("rate ladder levels must be positive"));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("rate ladder must be strictly increasing"));
        }
        Ok(RateLadder { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lowest rate `R_0` — the base layer every tile is fetched at.
    pub fn min_rate(&self) -> f64 {
        self.levels[0]
    }

    /// Highest rate `R_m`.
    pub fn max_rate(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    /// Largest level `<= x`. `x` must be within `[R_0, R_m]`.
    pub fn floor(&self, x: f64) -> Result<f64> {
        if x < self.min_rate() - TIME_EPS || x > self.max_rate() + TIME_EPS {
            return Err(Error::invalid(format!(
                "rate {x} outside ladder range [{}, {}]",
                self.min_rate(),
                self.max_rate()
            )));
        }
        Ok(*self
            .levels
            .iter()
            .rev()
            .find(|&&r| r <= x + TIME_EPS)
            .unwrap_or(&self.levels[0]))
    }

    /// Smallest level `>= x`. `x` must be within `[R_0, R_m]`.
    pub fn ceil(&self, x: f64) -> Result<f64> {
        if x < self.min_rate() - TIME_EPS || x > self.max_rate() + TIME_EPS {
            return Err(Error::invalid(format!(
                "rate {x} outside ladder range [{}, {}]",
                self.min_rate(),
                self.max_rate()
            )));
        }
        Ok(*self
            .levels
            .iter()
            .find(|&&r| r >= x - TIME_EPS)
            .unwrap_or(&self.levels[self.levels.len() - 1]))
    }

    /// Largest step between consecutive levels.
    pub fn max_gap(&self) -> f64 {
        self.levels
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// True when `x` sits on a ladder level (within tolerance).
    pub fn contains(&self, x: f64) -> bool {
        self.levels.iter().any(|&r| (r - x).abs() <= TIME_EPS)
    }
}

impl TryFrom<Vec<f64>> for RateLadder {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        RateLadder::new(v)
    }
}

impl From<RateLadder> for Vec<f64> {
    fn from(l: RateLadder) -> Vec<f64> {
        l.levels
    }
}

/// User utility per played chunk as a function of its rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilitySpec {
    /// `U(x) = x`.
    Linear,
    /// Concave piecewise-linear utility through the given `(rate, value)`
    /// breakpoints (strictly increasing values, nonincreasing slopes).
    ConcavePiecewise { breakpoints: Vec<(f64, f64)> },
}

impl UtilitySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            UtilitySpec::Linear => Ok(()),
            UtilitySpec::ConcavePiecewise { breakpoints } => {
                if breakpoints.len() < 2 {
                    return Err(Error::invalid("piecewise utility needs >= 2 breakpoints"));
                }
                let mut prev_slope = f64::INFINITY;
                for w in breakpoints.windows(2) {
                    let (x0, y0) = w[0];
                    let (x1, y1) = w[1];
                    if x1 <= x0 {
                        return Err(Error::invalid("utility breakpoints must increase in rate"));
                    }
                    if y1 <= y0 {
                        return Err(Error::invalid("utility must be strictly increasing"));
                    }
                    let slope = (y1 - y0) / (x1 - x0);
                    if slope > prev_slope + 1e-12 {
                        return Err(Error::invalid("utility breakpoints are not concave"));
                    }
                    prev_slope = slope;
                }
                Ok(())
            }
        }
    }

    /// Evaluate the utility. Piecewise specs interpolate between breakpoints
    /// and extend the end segments beyond the breakpoint range.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            UtilitySpec::Linear => x,
            UtilitySpec::ConcavePiecewise { breakpoints } => {
                let pts = breakpoints;
                let seg = match pts.iter().position(|&(bx, _)| bx > x) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => pts.len() - 2,
                };
                let (x0, y0) = pts[seg];
                let (x1, y1) = pts[seg + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// Every scenario constant for one streaming session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamConfig {
    /// Number of chunks `K` in the video.
    pub chunk_count: usize,
    /// Chunk duration `L` in seconds.
    pub chunk_duration_s: f64,
    /// Tile grid rows over latitude.
    pub grid_rows: usize,
    /// Tile grid columns over longitude.
    pub grid_cols: usize,
    /// Per-tile rate ladder in Mbps.
    pub ladder_mbps: RateLadder,
    /// Viewport extent (horizontal, vertical) in degrees.
    pub fov_h_deg: f64,
    pub fov_v_deg: f64,
    /// Coverage probability target for the viewable tile set.
    pub alpha: f64,
    /// Stall weight (QoE units per second of stall).
    pub lambda_per_s: f64,
    /// Inter-chunk rate-variation weight (QoE units per Mbps).
    pub eta_per_mbps: f64,
    /// Forward-looking window size in chunks.
    pub window_chunks: usize,
    /// Playback buffer capacity in chunks.
    pub buffer_chunks: usize,
    /// Initial startup delay before the first chunk plays, seconds.
    #[serde(default = "default_startup")]
    pub startup_delay_s: f64,
    /// Initial chunks forced to the base rate while the bandwidth estimator
    /// gathers samples.
    #[serde(default = "default_warmup")]
    pub warmup_chunks: usize,
    /// Throughput-history length for the harmonic-mean estimator.
    #[serde(default = "default_hm_samples")]
    pub hm_samples: usize,
    /// Weight put on the live viewport when blending with crowd statistics.
    #[serde(default = "default_blend")]
    pub fov_blend_weight: f64,
    /// Utility shape; linear matches the evaluation setup.
    #[serde(default = "default_utility")]
    pub utility: UtilitySpec,
    /// When set, a chunk that misses its play deadline mid-download is
    /// finished at the base layer instead of its planned rates.
    #[serde(default)]
    pub mid_chunk_floor: bool,
}

fn default_startup() -> f64 {
    1.0
}
fn default_warmup() -> usize {
    2
}
fn default_hm_samples() -> usize {
    200
}
fn default_blend() -> f64 {
    0.6
}
fn default_utility() -> UtilitySpec {
    UtilitySpec::Linear
}

impl Default for StreamConfig {
    /// The evaluation setup: 4x8 equirectangular grid, 2-second chunks,
    /// ladder {0.25, 0.5, 0.75, 1} Mbps per tile, 120x120-degree viewport,
    /// alpha 0.95, lambda 100, window 5.
    fn default() -> Self {
        StreamConfig {
            chunk_count: 120,
            chunk_duration_s: 2.0,
            grid_rows: 4,
            grid_cols: 8,
            ladder_mbps: RateLadder::new(vec![0.25, 0.5, 0.75, 1.0]).unwrap(),
            fov_h_deg: 120.0,
            fov_v_deg: 120.0,
            alpha: 0.95,
            lambda_per_s: 100.0,
            eta_per_mbps: 1.0,
            window_chunks: 5,
            buffer_chunks: 120,
            startup_delay_s: default_startup(),
            warmup_chunks: default_warmup(),
            hm_samples: default_hm_samples(),
            fov_blend_weight: default_blend(),
            utility: UtilitySpec::Linear,
            mid_chunk_floor: false,
        }
    }
}

impl StreamConfig {
    /// Tiles per chunk `N = rows * cols`.
    pub fn n_tiles(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_count == 0 {
            return Err(Error::invalid("chunk_count must be >= 1"));
        }
        if self.chunk_duration_s <= 0.0 {
            return Err(Error::invalid("chunk_duration_s must be positive"));
        }
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::invalid("tile grid must be at least 1x1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1]"));
        }
        if self.lambda_per_s < 0.0 || self.eta_per_mbps < 0.0 {
            return Err(Error::invalid("QoE weights must be nonnegative"));
        }
        if self.window_chunks == 0 || self.window_chunks > self.chunk_count {
            return Err(Error::invalid("window must satisfy 1 <= W <= K"));
        }
        if self.buffer_chunks == 0 {
            return Err(Error::invalid("buffer cap must be >= 1 chunk"));
        }
        if !(0.0..=1.0).contains(&self.fov_blend_weight) {
            return Err(Error::invalid("fov_blend_weight must lie in [0, 1]"));
        }
        if self.startup_delay_s < 0.0 {
            return Err(Error::invalid("startup delay must be nonnegative"));
        }
        self.utility.validate()
    }
}

/// Per-chunk minimum-rate decisions plus the expanded per-tile rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// Minimum rate over the covered tile set, per chunk, Mbps.
    pub gamma: Vec<f64>,
    /// `tile_rates[k][i]` — rate of tile `i` in chunk `k`, Mbps.
    pub tile_rates: Vec<Vec<f64>>,
}

impl Plan {
    /// Chunk sizes in megabits: `L * sum_i R_{i,k}`.
    pub fn chunk_sizes(&self, chunk_duration_s: f64) -> Vec<f64> {
        self.tile_rates
            .iter()
            .map(|tiles| chunk_duration_s * tiles.iter().sum::<f64>())
            .collect()
    }
}

/// Download/playback schedule of a whole session.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    /// `K+1` download start instants; `start[0] = 0`, `start[k]` is when
    /// chunk `k+1` begins (equivalently chunk `k` finished plus any wait).
    pub start: Vec<f64>,
    /// Play instants, one per chunk.
    pub play: Vec<f64>,
    /// Post-download waits, one per chunk; positive only when the buffer
    /// cap binds. The wait after the last chunk is always zero.
    pub wait: Vec<f64>,
    /// Total stall: `play[K-1] - (K-1)L - t_ini`.
    pub stall: f64,
}

/// QoE split into its three terms; `total = utility_sum - stall_penalty -
/// variation_penalty`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoEBreakdown {
    pub utility_sum: f64,
    pub stall_penalty: f64,
    pub variation_penalty: f64,
    pub total: f64,
}

/// Build the download/playback timeline for fixed chunk sizes against
/// per-chunk average bandwidths.
///
/// `start` advances by `size_k / C_k` plus the minimal wait keeping the
/// buffer within its cap; chunk `k`'s play time is the later of its
/// download completion and the previous chunk's play plus `L` (the first
/// chunk waits at least for the startup delay).
pub fn build_timeline(
    chunk_sizes_mbit: &[f64],
    bandwidth_mbps: &[f64],
    config: &StreamConfig,
) -> Result<Timeline> {
    let k = config.chunk_count;
    if chunk_sizes_mbit.len() != k || bandwidth_mbps.len() != k {
        return Err(Error::invalid(format!(
            "expected {k} sizes and bandwidths, got {} and {}",
            chunk_sizes_mbit.len(),
            bandwidth_mbps.len()
        )));
    }
    if chunk_sizes_mbit.iter().any(|&s| s <= 0.0 || s.is_nan()) {
        return Err(Error::invalid("chunk sizes must be positive"));
    }
    if bandwidth_mbps.iter().any(|&c| c <= 0.0 || c.is_nan()) {
        return Err(Error::invalid("bandwidth must be positive"));
    }

    let l = config.chunk_duration_s;
    let b = config.buffer_chunks;
    let mut start: Vec<f64> = Vec::with_capacity(k + 1);
    let mut play: Vec<f64> = Vec::with_capacity(k);
    let mut wait: Vec<f64> = Vec::with_capacity(k);
    start.push(0.0);

    for i in 0..k {
        let finish = start[i] + chunk_sizes_mbit[i] / bandwidth_mbps[i];
        let p = if i == 0 {
            config.startup_delay_s.max(finish)
        } else {
            (play[i - 1] + l).max(finish)
        };
        play.push(p);

        // Wait before chunk i+2 (0-based i+1) so that the download of chunk
        // B+j never starts before chunk j plays.
        let w = if i + 1 < k {
            let next = i + 1; // 0-based index of the next chunk
            if next >= b {
                (play[next - b] - finish).max(0.0)
            } else {
                0.0
            }
        } else {
            0.0
        };
        wait.push(w);
        start.push(finish + w);
    }

    let stall = play[k - 1] - (k as f64 - 1.0) * l - config.startup_delay_s;
    Ok(Timeline {
        start,
        play,
        wait,
        stall,
    })
}

/// Evaluate the QoE of a rate sequence against a timeline:
/// `sum U(gamma_k) - lambda * stall - eta * sum |gamma_k - gamma_{k+1}|`.
pub fn qoe_score(
    gamma: &[f64],
    timeline: &Timeline,
    utility: &UtilitySpec,
    config: &StreamConfig,
) -> Result<QoEBreakdown> {
    if gamma.len() != config.chunk_count {
        return Err(Error::invalid(format!(
            "gamma length {} != chunk count {}",
            gamma.len(),
            config.chunk_count
        )));
    }
    if timeline.play.len() != config.chunk_count {
        return Err(Error::invalid("timeline does not match the configuration"));
    }
    let utility_sum: f64 = gamma.iter().map(|&g| utility.value(g)).sum();
    let stall_penalty = config.lambda_per_s * timeline.stall;
    let variation: f64 = gamma.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
    let variation_penalty = config.eta_per_mbps * variation;
    Ok(QoEBreakdown {
        utility_sum,
        stall_penalty,
        variation_penalty,
        total: utility_sum - stall_penalty - variation_penalty,
    })
}

/// Expand per-chunk minimum rates into per-tile rates: tiles inside the
/// chunk's covered set get `gamma_k`, everything else the base rate.
pub fn expand_plan(
    gamma: &[f64],
    covered_sets: &[crate::fov::FovSet],
    config: &StreamConfig,
) -> Result<Plan> {
    if gamma.len() != config.chunk_count || covered_sets.len() != config.chunk_count {
        return Err(Error::invalid("gamma/covered-set length mismatch"));
    }
    let r0 = config.ladder_mbps.min_rate();
    let rm = config.ladder_mbps.max_rate();
    let n = config.n_tiles();
    let mut tile_rates = Vec::with_capacity(gamma.len());
    for (k, &g) in gamma.iter().enumerate() {
        if g < r0 - TIME_EPS || g > rm + TIME_EPS {
            return Err(Error::invalid(format!(
                "gamma[{k}] = {g} outside [{r0}, {rm}]"
            )));
        }
        let set = &covered_sets[k];
        if set.iter().any(|t| t >= n) {
            return Err(Error::invalid(format!(
                "covered set of chunk {k} references a tile outside the {n}-tile grid"
            )));
        }
        let mut tiles = vec![r0; n];
        for t in set.iter() {
            tiles[t] = g;
        }
        tile_rates.push(tiles);
    }
    Ok(Plan {
        gamma: gamma.to_vec(),
        tile_rates,
    })
}
