//! The continuous scheduling relaxation: pick per-chunk rates in
//! `[R_0, R_m]` maximizing utility minus stall and variation penalties,
//! solved exactly as a linear program.
//!
//! Linear utility makes the LP exact; concave utilities are handled by a
//! piecewise-linear under-approximation whose worst-case gap is reported on
//! the solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve, LpProblem, Rel};
use crate::model::UtilitySpec;
use crate::tol::LP_FEAS_EPS;

/// One scheduling decision problem over a contiguous chunk range, either a
/// whole session (offline) or a lookahead window anchored at the live
/// session state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedInstance {
    /// Global 0-based index of the first chunk in the range.
    pub first_chunk: usize,
    /// Covered-set cardinality per chunk in the range.
    pub alpha_card: Vec<usize>,
    /// Tiles per chunk; the complement `N - |A_k|` rides at the base rate.
    pub n_tiles: usize,
    /// Estimated average bandwidth per chunk, Mbps.
    pub bandwidth: Vec<f64>,
    /// Ladder bounds.
    pub rate_min: f64,
    pub rate_max: f64,
    pub lambda: f64,
    pub eta: f64,
    pub utility: UtilitySpec,
    /// Chunk duration, seconds.
    pub chunk_duration: f64,
    /// Instant the first chunk's download may begin.
    pub start_time: f64,
    /// Play time of the chunk preceding the range; `None` at session start,
    /// where the startup delay rules the first play instead.
    pub prev_play: Option<f64>,
    /// Committed rate of the preceding chunk, anchoring the variation term.
    pub prev_gamma: Option<f64>,
    /// Playback buffer capacity in chunks.
    pub buffer_chunks: usize,
    /// Startup delay, seconds.
    pub t_ini: f64,
    /// Constant subtracted from the final play time in the stall term.
    pub stall_deadline: f64,
    /// Play times of the chunks just before the range (oldest first,
    /// ending at `first_chunk - 1`), used by the buffer constraint.
    #[serde(default)]
    pub prior_plays: Vec<f64>,
    /// Piecewise-linearization resolution for concave utilities.
    #[serde(default = "default_segments")]
    pub utility_segments: usize,
}

fn default_segments() -> usize {
    8
}

/// Download/playback schedule of a chunk range.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTimeline {
    pub begin: Vec<f64>,
    pub finish: Vec<f64>,
    pub play: Vec<f64>,
}

/// Optimal relaxed rates with the schedule they induce.
#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub gamma: Vec<f64>,
    pub timeline: WindowTimeline,
    pub objective: f64,
    /// Worst-case utility under-approximation per chunk (zero for linear
    /// utilities); the true relaxed optimum lies within
    /// `objective + count * linearization_gap`.
    pub linearization_gap: f64,
}

/// A line `y = slope * x + intercept` under-approximating the utility over
/// one span of `[R_0, R_m]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
}

impl Segment {
    pub fn value_at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

impl RelaxedInstance {
    /// A whole-session instance: chunks `0..cards.len()`, download starting
    /// at zero, stall measured against `(K-1)L + t_ini`.
    #[allow(clippy::too_many_arguments)]
    pub fn offline(
        alpha_card: Vec<usize>,
        n_tiles: usize,
        bandwidth: Vec<f64>,
        rate_min: f64,
        rate_max: f64,
        lambda: f64,
        eta: f64,
        utility: UtilitySpec,
        chunk_duration: f64,
        buffer_chunks: usize,
        t_ini: f64,
    ) -> Result<Self> {
        let count = alpha_card.len();
        let instance = RelaxedInstance {
            first_chunk: 0,
            alpha_card,
            n_tiles,
            bandwidth,
            rate_min,
            rate_max,
            lambda,
            eta,
            utility,
            chunk_duration,
            start_time: 0.0,
            prev_play: None,
            prev_gamma: None,
            buffer_chunks,
            t_ini,
            stall_deadline: (count.saturating_sub(1)) as f64 * chunk_duration + t_ini,
            prior_plays: Vec::new(),
            utility_segments: default_segments(),
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn count(&self) -> usize {
        self.alpha_card.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_card.is_empty() {
            return Err(Error::invalid("instance needs at least one chunk"));
        }
        if self.bandwidth.len() != self.alpha_card.len() {
            return Err(Error::invalid("bandwidth/cardinality length mismatch"));
        }
        if self.bandwidth.iter().any(|&c| c <= 0.0 || c.is_nan()) {
            return Err(Error::invalid("bandwidth estimates must be positive"));
        }
        if self.alpha_card.iter().any(|&a| a == 0 || a > self.n_tiles) {
            return Err(Error::invalid("covered-set cardinality outside [1, N]"));
        }
        if !(self.rate_min > 0.0 && self.rate_max > self.rate_min) {
            return Err(Error::invalid("need 0 < rate_min < rate_max"));
        }
        if self.lambda < 0.0 || self.eta < 0.0 {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        if self.chunk_duration <= 0.0 {
            return Err(Error::invalid("chunk duration must be positive"));
        }
        if self.buffer_chunks == 0 {
            return Err(Error::invalid("buffer cap must be >= 1"));
        }
        self.utility.validate()
    }

    /// Download seconds for chunk `j` (range-relative) at rate `gamma`.
    pub fn duration(&self, j: usize, gamma: f64) -> f64 {
        let covered = self.alpha_card[j] as f64;
        let base = (self.n_tiles - self.alpha_card[j]) as f64;
        self.chunk_duration * (covered * gamma + base * self.rate_min) / self.bandwidth[j]
    }

    /// Earliest-feasible schedule for the given rates: downloads run
    /// back-to-back except for buffer-cap waits, each chunk plays at the
    /// later of its cadence slot and its download completion.
    pub fn window_timeline(&self, gamma: &[f64]) -> WindowTimeline {
        let n = self.count();
        assert_eq!(gamma.len(), n, "rate vector length mismatch");
        let l = self.chunk_duration;
        let mut begin: Vec<f64> = Vec::with_capacity(n);
        let mut finish: Vec<f64> = Vec::with_capacity(n);
        let mut play: Vec<f64> = Vec::with_capacity(n);
        for j in 0..n {
            let b = if j == 0 {
                self.start_time
            } else {
                let mut b = finish[j - 1];
                if let Some(bound) = self.buffer_bound(j, &play) {
                    b = b.max(bound);
                }
                b
            };
            let f = b + self.duration(j, gamma[j]);
            let floor = if j == 0 {
                match self.prev_play {
                    Some(p) => p + l,
                    None => self.t_ini,
                }
            } else {
                play[j - 1] + l
            };
            begin.push(b);
            finish.push(f);
            play.push(floor.max(f));
        }
        WindowTimeline {
            begin,
            finish,
            play,
        }
    }

    /// Play-time floor the buffer cap imposes on the start of range chunk
    /// `j` (`None` when the cap cannot bind).
    fn buffer_bound(&self, j: usize, plays_so_far: &[f64]) -> Option<f64> {
        let global = self.first_chunk + j;
        if global < self.buffer_chunks {
            return None;
        }
        let gated_by = global - self.buffer_chunks; // global 0-based chunk
        if gated_by >= self.first_chunk {
            Some(plays_so_far[gated_by - self.first_chunk])
        } else {
            let oldest = self.first_chunk - self.prior_plays.len();
            if gated_by >= oldest {
                Some(self.prior_plays[gated_by - oldest])
            } else {
                None
            }
        }
    }

    /// The exact objective of a rate vector under the true utility.
    pub fn objective_value(&self, gamma: &[f64]) -> f64 {
        self.objective_with(gamma, |x| self.utility.value(x))
    }

    fn objective_with(&self, gamma: &[f64], utility: impl Fn(f64) -> f64) -> f64 {
        let timeline = self.window_timeline(gamma);
        let utility_sum: f64 = gamma.iter().map(|&g| utility(g)).sum();
        let stall_term = self.lambda * (timeline.play[self.count() - 1] - self.stall_deadline);
        let mut variation: f64 = gamma.windows(2).map(|w| (w[0] - w[1]).abs()).sum();
        if let Some(prev) = self.prev_gamma {
            variation += (gamma[0] - prev).abs();
        }
        utility_sum - stall_term - self.eta * variation
    }
}

/// Chord segments of the utility at uniform breakpoints over `[lo, hi]`.
/// Linear utilities collapse to one exact segment; for concave utilities
/// the minimum over the segments under-approximates the function by at most
/// the largest chord gap.
pub fn linearize_utility(
    utility: &UtilitySpec,
    segment_count: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<Segment>> {
    if segment_count == 0 {
        return Err(Error::invalid("need at least one segment"));
    }
    if hi <= lo || hi.is_nan() || lo.is_nan() {
        return Err(Error::invalid("empty linearization range"));
    }
    utility.validate()?;
    if matches!(utility, UtilitySpec::Linear) {
        return Ok(vec![Segment {
            slope: 1.0,
            intercept: 0.0,
        }]);
    }
    let mut segments = Vec::with_capacity(segment_count);
    for i in 0..segment_count {
        let x0 = lo + (hi - lo) * i as f64 / segment_count as f64;
        let x1 = lo + (hi - lo) * (i + 1) as f64 / segment_count as f64;
        let y0 = utility.value(x0);
        let y1 = utility.value(x1);
        let slope = (y1 - y0) / (x1 - x0);
        segments.push(Segment {
            slope,
            intercept: y0 - slope * x0,
        });
    }
    Ok(segments)
}

/// Largest gap between the utility and the lower envelope of its chord
/// segments over `[lo, hi]`.
fn linearization_gap(utility: &UtilitySpec, segments: &[Segment], lo: f64, hi: f64) -> f64 {
    let envelope = |x: f64| {
        segments
            .iter()
            .map(|s| s.value_at(x))
            .fold(f64::INFINITY, f64::min)
    };
    // The gap of a piecewise-linear function against a chord envelope is
    // attained at a breakpoint of either side; probe those plus midpoints.
    let mut probes: Vec<f64> = Vec::new();
    if let UtilitySpec::ConcavePiecewise { breakpoints } = utility {
        probes.extend(breakpoints.iter().map(|&(x, _)| x));
    }
    let count = segments.len().max(1);
    for i in 0..=count {
        let x = lo + (hi - lo) * i as f64 / count as f64;
        probes.push(x);
        probes.push((x + (hi - lo) / (2.0 * count as f64)).min(hi));
    }
    probes
        .into_iter()
        .filter(|&x| (lo..=hi).contains(&x))
        .map(|x| utility.value(x) - envelope(x))
        .fold(0.0, f64::max)
}

/// The LP encoding of an instance plus the variable indices needed to read
/// a solution back.
pub struct RelaxedLp {
    pub problem: LpProblem,
    gamma_vars: Vec<usize>,
    linearization_gap: f64,
}

/// Build the LP without solving it (also behind the CLI's model-dump flag).
pub fn build_lp(instance: &RelaxedInstance) -> Result<RelaxedLp> {
    instance.validate()?;
    let n = instance.count();
    let l = instance.chunk_duration;
    let (r0, rm) = (instance.rate_min, instance.rate_max);
    let segs = match instance.utility {
        UtilitySpec::Linear => 1,
        _ => instance.utility_segments.max(1),
    };
    let segments = linearize_utility(&instance.utility, segs, r0, rm)?;
    let gap = linearization_gap(&instance.utility, &segments, r0, rm);

    let mut lp = LpProblem::new();
    let u_lo = segments
        .iter()
        .map(|s| s.value_at(r0))
        .fold(f64::INFINITY, f64::min);

    let gamma: Vec<usize> = (0..n)
        .map(|j| lp.add_var(format!("gamma{j}"), 0.0, r0, rm))
        .collect();
    let util: Vec<usize> = (0..n)
        .map(|j| lp.add_var(format!("u{j}"), 1.0, u_lo, f64::INFINITY))
        .collect();
    // start[j] for j >= 1; the first chunk starts at the anchor.
    let starts: Vec<usize> = (1..n)
        .map(|j| lp.add_var(format!("s{j}"), 0.0, 0.0, f64::INFINITY))
        .collect();
    let plays: Vec<usize> = (0..n)
        .map(|j| {
            let coeff = if j == n - 1 { -instance.lambda } else { 0.0 };
            lp.add_var(format!("p{j}"), coeff, 0.0, f64::INFINITY)
        })
        .collect();

    let coef = |j: usize| {
        let a = l * instance.alpha_card[j] as f64 / instance.bandwidth[j];
        let b = l * (instance.n_tiles - instance.alpha_card[j]) as f64 * r0 / instance.bandwidth[j];
        (a, b)
    };

    // Download chain: start[j] >= start[j-1] + duration(j-1), with the
    // first start fixed to the anchor. starts[j-1] holds the variable for
    // start[j].
    for j in 1..n {
        let (a, b) = coef(j - 1);
        if j == 1 {
            lp.add_row(
                vec![(starts[0], 1.0), (gamma[0], -a)],
                Rel::Ge,
                b + instance.start_time,
            );
        } else {
            lp.add_row(
                vec![
                    (starts[j - 1], 1.0),
                    (starts[j - 2], -1.0),
                    (gamma[j - 1], -a),
                ],
                Rel::Ge,
                b,
            );
        }
    }

    // Play after download completion: play[j] >= start[j] + duration(j).
    for j in 0..n {
        let (a, b) = coef(j);
        if j == 0 {
            lp.add_row(
                vec![(plays[0], 1.0), (gamma[0], -a)],
                Rel::Ge,
                b + instance.start_time,
            );
        } else {
            lp.add_row(
                vec![(plays[j], 1.0), (starts[j - 1], -1.0), (gamma[j], -a)],
                Rel::Ge,
                b,
            );
        }
    }

    // Playback cadence.
    let first_floor = match instance.prev_play {
        Some(p) => p + l,
        None => instance.t_ini,
    };
    lp.add_row(vec![(plays[0], 1.0)], Rel::Ge, first_floor);
    for j in 1..n {
        lp.add_row(vec![(plays[j], 1.0), (plays[j - 1], -1.0)], Rel::Ge, l);
    }

    // Buffer cap: the download of chunk B+k may not start before chunk k
    // plays.
    for j in 1..n {
        let global = instance.first_chunk + j;
        if global < instance.buffer_chunks {
            continue;
        }
        let gated_by = global - instance.buffer_chunks;
        if gated_by >= instance.first_chunk {
            lp.add_row(
                vec![
                    (starts[j - 1], 1.0),
                    (plays[gated_by - instance.first_chunk], -1.0),
                ],
                Rel::Ge,
                0.0,
            );
        } else {
            let oldest = instance.first_chunk - instance.prior_plays.len();
            if gated_by >= oldest {
                lp.add_row(
                    vec![(starts[j - 1], 1.0)],
                    Rel::Ge,
                    instance.prior_plays[gated_by - oldest],
                );
            }
        }
    }

    // Inter-chunk variation, split into nonnegative envelopes. With a zero
    // weight the term vanishes from both the LP and the exact objective.
    if instance.eta > 0.0 {
        for j in 0..n.saturating_sub(1) {
            let v = lp.add_var(format!("v{j}"), -instance.eta, 0.0, f64::INFINITY);
            lp.add_row(
                vec![(v, 1.0), (gamma[j], -1.0), (gamma[j + 1], 1.0)],
                Rel::Ge,
                0.0,
            );
            lp.add_row(
                vec![(v, 1.0), (gamma[j], 1.0), (gamma[j + 1], -1.0)],
                Rel::Ge,
                0.0,
            );
        }
        if let Some(prev) = instance.prev_gamma {
            let v = lp.add_var("v_prev", -instance.eta, 0.0, f64::INFINITY);
            lp.add_row(vec![(v, 1.0), (gamma[0], -1.0)], Rel::Ge, -prev);
            lp.add_row(vec![(v, 1.0), (gamma[0], 1.0)], Rel::Ge, prev);
        }
    }

    // Utility epigraph under the chord segments.
    for j in 0..n {
        for seg in &segments {
            lp.add_row(
                vec![(util[j], 1.0), (gamma[j], -seg.slope)],
                Rel::Le,
                seg.intercept,
            );
        }
    }

    Ok(RelaxedLp {
        problem: lp,
        gamma_vars: gamma,
        linearization_gap: gap,
    })
}

/// Solve the relaxation. The returned timeline is the earliest-feasible
/// schedule of the optimal rates; the objective matches
/// `objective_value(gamma)` exactly for linear utilities.
pub fn solve_relaxed(instance: &RelaxedInstance) -> Result<RelaxedSolution> {
    let lp = build_lp(instance)?;
    let solution = solve(&lp.problem).map_err(|e| {
        Error::Solver(format!(
            "relaxation solve failed: {e}\nmodel:\n{}",
            lp.problem.dump()
        ))
    })?;

    let gamma_star: Vec<f64> = lp
        .gamma_vars
        .iter()
        .map(|&i| solution.x[i].clamp(instance.rate_min, instance.rate_max))
        .collect();
    let objective = solution.objective + instance.lambda * instance.stall_deadline;
    let timeline = instance.window_timeline(&gamma_star);
    Ok(RelaxedSolution {
        gamma: gamma_star,
        timeline,
        objective,
        linearization_gap: lp.linearization_gap,
    })
}

impl RelaxedSolution {
    /// Check the solution against the instance: rates in bounds and the
    /// reported objective consistent with an exact re-evaluation (for
    /// linear utilities the two must agree to LP tolerance).
    pub fn verify(&self, instance: &RelaxedInstance) -> Result<()> {
        for (j, &g) in self.gamma.iter().enumerate() {
            if g < instance.rate_min - LP_FEAS_EPS || g > instance.rate_max + LP_FEAS_EPS {
                return Err(Error::Solver(format!(
                    "gamma[{j}] = {g} violates the rate bounds"
                )));
            }
        }
        let replay = instance.objective_value(&self.gamma);
        let slack = instance.count() as f64 * self.linearization_gap + LP_FEAS_EPS;
        if self.objective > replay + LP_FEAS_EPS || self.objective < replay - slack {
            return Err(Error::Solver(format!(
                "reported objective {} inconsistent with replayed value {replay}",
                self.objective
            )));
        }
        Ok(())
    }

    /// Stall of the relaxed schedule relative to the instance deadline.
    pub fn stall_term(&self, instance: &RelaxedInstance) -> f64 {
        self.timeline.play[self.timeline.play.len() - 1] - instance.stall_deadline
    }
}
