//! Parsing, generation, and perturbation of bandwidth and head-movement
//! traces.
//!
//! Both trace formats are plain CSV so fixtures stay hand-auditable:
//! bandwidth lines are `t_ms,mbps`, head lines are `t_ms,yaw,pitch,roll`.
//! Lines starting with `#` and blank lines are skipped.

use std::io::BufRead;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fov::{tiles_in_viewport, FovSet, Orientation};

/// Millisecond-stamped throughput samples, strictly increasing timestamps,
/// all values positive. Between samples the throughput holds the earlier
/// sample's value; past the end the last value holds.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthTrace {
    pub samples: Vec<(u64, f64)>,
}

impl BandwidthTrace {
    pub fn new(samples: Vec<(u64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("bandwidth trace is empty"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        if samples.iter().any(|&(_, m)| m <= 0.0 || m.is_nan()) {
            return Err(Error::invalid("throughput must be positive"));
        }
        Ok(BandwidthTrace { samples })
    }

    pub fn last_ms(&self) -> u64 {
        self.samples[self.samples.len() - 1].0
    }

    /// Throughput at time `t` seconds (step function, last value held).
    pub fn rate_at(&self, t_s: f64) -> f64 {
        let t_ms = t_s * 1000.0;
        match self.samples.partition_point(|&(ts, _)| (ts as f64) <= t_ms) {
            0 => self.samples[0].1,
            i => self.samples[i - 1].1,
        }
    }

    /// Advance a download of `size_mbit` starting at `from_s`, returning the
    /// completion instant in seconds.
    pub fn download_finish(&self, from_s: f64, size_mbit: f64) -> f64 {
        let mut remaining = size_mbit;
        let mut t = from_s;
        let mut idx = self
            .samples
            .partition_point(|&(ts, _)| (ts as f64) <= t * 1000.0);
        // idx points at the first sample strictly after t.
        loop {
            let rate = if idx == 0 {
                self.samples[0].1
            } else {
                self.samples[idx - 1].1
            };
            let seg_end = if idx < self.samples.len() {
                self.samples[idx].0 as f64 / 1000.0
            } else {
                f64::INFINITY
            };
            let span = seg_end - t;
            let capacity = rate * span;
            if capacity >= remaining {
                return t + remaining / rate;
            }
            remaining -= capacity;
            t = seg_end;
            idx += 1;
        }
    }

    /// Megabits transferable in `[from_s, to_s]`.
    pub fn transferred(&self, from_s: f64, to_s: f64) -> f64 {
        if to_s <= from_s {
            return 0.0;
        }
        let mut total = 0.0;
        let mut t = from_s;
        let mut idx = self
            .samples
            .partition_point(|&(ts, _)| (ts as f64) <= t * 1000.0);
        loop {
            let rate = if idx == 0 {
                self.samples[0].1
            } else {
                self.samples[idx - 1].1
            };
            let seg_end = if idx < self.samples.len() {
                (self.samples[idx].0 as f64 / 1000.0).min(to_s)
            } else {
                to_s
            };
            total += rate * (seg_end - t);
            if seg_end >= to_s {
                return total;
            }
            t = seg_end;
            idx += 1;
        }
    }

    /// Samples with timestamps in `[from_s, to_s)`, as (seconds, Mbps).
    pub fn samples_between(&self, from_s: f64, to_s: f64) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter(|&&(ts, _)| {
                let t = ts as f64 / 1000.0;
                t >= from_s && t < to_s
            })
            .map(|&(ts, m)| (ts as f64 / 1000.0, m))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for &(ts, m) in &self.samples {
            out.push_str(&format!("{ts},{m}\n"));
        }
        out
    }
}

/// Millisecond-stamped head poses.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadTrace {
    pub samples: Vec<(u64, Orientation)>,
}

impl HeadTrace {
    pub fn new(samples: Vec<(u64, Orientation)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("head trace is empty"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("timestamps must be strictly increasing"));
        }
        Ok(HeadTrace {
            samples: samples
                .into_iter()
                .map(|(ts, o)| (ts, o.normalized()))
                .collect(),
        })
    }

    pub fn last_ms(&self) -> u64 {
        self.samples[self.samples.len() - 1].0
    }

    /// Pose at `t_ms`: the latest sample at or before `t_ms`. Errors when
    /// the trace does not span the requested instant.
    pub fn pose_at_ms(&self, t_ms: f64) -> Result<Orientation> {
        if (self.samples[0].0 as f64) > t_ms || (self.last_ms() as f64) < t_ms {
            return Err(Error::invalid(format!(
                "head trace covers [{}, {}] ms but {t_ms} ms was requested",
                self.samples[0].0,
                self.last_ms()
            )));
        }
        let i = self.samples.partition_point(|&(ts, _)| ts as f64 <= t_ms);
        Ok(self.samples[i - 1].1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for &(ts, o) in &self.samples {
            out.push_str(&format!(
                "{ts},{},{},{}\n",
                o.yaw_deg, o.pitch_deg, o.roll_deg
            ));
        }
        out
    }
}

fn csv_lines(reader: impl BufRead) -> Result<Vec<(usize, String)>> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((i + 1, trimmed.to_string()));
    }
    Ok(lines)
}

fn parse_field(raw: &str, line: usize, what: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        reason: format!("cannot parse {what} from {raw:?}"),
    })
}

/// Parse `t_ms,mbps` lines into a validated bandwidth trace.
pub fn parse_bandwidth_trace(reader: impl BufRead) -> Result<BandwidthTrace> {
    let mut samples = Vec::new();
    for (line, text) in csv_lines(reader)? {
        let mut parts = text.split(',');
        let (ts, rate) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line,
                    reason: "expected two fields: t_ms,mbps".into(),
                })
            }
        };
        let ts = parse_field(ts, line, "timestamp")?;
        if ts < 0.0 || ts.fract() != 0.0 {
            return Err(Error::Parse {
                line,
                reason: format!("timestamp must be a nonnegative integer, got {ts}"),
            });
        }
        let rate = parse_field(rate, line, "throughput")?;
        samples.push((ts as u64, rate));
    }
    BandwidthTrace::new(samples)
}

/// Parse `t_ms,yaw,pitch,roll` lines into a validated head trace. Yaw is
/// wrapped into `[-180, 180)`; out-of-range pitch is clamped with a warning.
pub fn parse_head_trace(reader: impl BufRead) -> Result<HeadTrace> {
    let mut samples = Vec::new();
    for (line, text) in csv_lines(reader)? {
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line,
                reason: "expected four fields: t_ms,yaw,pitch,roll".into(),
            });
        }
        let ts = parse_field(fields[0], line, "timestamp")?;
        if ts < 0.0 || ts.fract() != 0.0 {
            return Err(Error::Parse {
                line,
                reason: format!("timestamp must be a nonnegative integer, got {ts}"),
            });
        }
        let yaw = parse_field(fields[1], line, "yaw")?;
        let pitch = parse_field(fields[2], line, "pitch")?;
        let roll = parse_field(fields[3], line, "roll")?;
        if !(-90.0..=90.0).contains(&pitch) {
            log::warn!("line {line}: pitch {pitch} outside [-90, 90], clamping");
        }
        samples.push((ts as u64, Orientation::new(yaw, pitch, roll)));
    }
    HeadTrace::new(samples)
}

fn derive_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Scale each chunk-length span of the trace by an independent `(1 + p)`
/// factor, `p ~ Uniform[-e, e]`, deterministically per seed. Models
/// chunk-level estimation error in the realized bandwidth.
pub fn perturb_bandwidth(
    trace: &BandwidthTrace,
    error: f64,
    chunk_duration_s: f64,
    seed: u64,
) -> Result<BandwidthTrace> {
    if !(0.0..1.0).contains(&error) {
        return Err(Error::invalid(
            "bandwidth error magnitude must lie in [0, 1)",
        ));
    }
    if error == 0.0 {
        return Ok(trace.clone());
    }
    let span_ms = (chunk_duration_s * 1000.0).max(1.0) as u64;
    let max_span = trace.last_ms() / span_ms;
    let mut rng = derive_rng(seed, 0xB4_7D);
    let factors: Vec<f64> = (0..=max_span)
        .map(|_| 1.0 + rng.gen_range(-error..=error))
        .collect();
    let samples = trace
        .samples
        .iter()
        .map(|&(ts, m)| (ts, m * factors[(ts / span_ms) as usize]))
        .collect();
    BandwidthTrace::new(samples)
}

/// The viewport sequence a policy observes: each chunk keeps the true set
/// with probability `beta`, otherwise the viewport of a uniformly random
/// pose is substituted. Scoring must keep using the true sequence.
pub fn perturb_fov(
    true_fovs: &[FovSet],
    beta: f64,
    seed: u64,
    grid: (usize, usize),
    extent: (f64, f64),
) -> Result<Vec<FovSet>> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::invalid("FoV fidelity must lie in [0, 1]"));
    }
    let mut rng = derive_rng(seed, 0xF0_57);
    Ok(true_fovs
        .iter()
        .map(|fov| {
            // Draw both randoms unconditionally so the stream position does
            // not depend on beta comparisons.
            let keep: f64 = rng.gen();
            let yaw = rng.gen_range(-180.0..180.0);
            let pitch = rng.gen_range(-90.0..=90.0);
            if keep < beta {
                fov.clone()
            } else {
                tiles_in_viewport(Orientation::new(yaw, pitch, 0.0), grid, extent)
            }
        })
        .collect())
}

/// Synthetic bandwidth profiles standing in for measured traces.
#[derive(Debug, Clone)]
pub enum BandwidthProfile {
    /// Flat throughput.
    Constant { mbps: f64 },
    /// Square wave between `hi` and `lo`, switching every `dwell_s`,
    /// starting `phase_s` into the high period.
    TwoState {
        hi_mbps: f64,
        lo_mbps: f64,
        dwell_s: f64,
        phase_s: f64,
    },
    /// Seeded multiplicative random walk reflected into `[min, max]`.
    RandomWalk {
        start_mbps: f64,
        min_mbps: f64,
        max_mbps: f64,
        step_frac: f64,
        seed: u64,
    },
}

pub fn synth_bandwidth(
    profile: &BandwidthProfile,
    duration_s: f64,
    interval_ms: u64,
) -> Result<BandwidthTrace> {
    if duration_s <= 0.0 || interval_ms == 0 {
        return Err(Error::invalid(
            "duration and sample interval must be positive",
        ));
    }
    let steps = (duration_s * 1000.0 / interval_ms as f64).ceil() as u64;
    let mut samples = Vec::with_capacity(steps as usize + 1);
    match profile {
        BandwidthProfile::Constant { mbps } => {
            if *mbps <= 0.0 || mbps.is_nan() {
                return Err(Error::invalid("constant profile needs positive throughput"));
            }
            for i in 0..=steps {
                samples.push((i * interval_ms, *mbps));
            }
        }
        BandwidthProfile::TwoState {
            hi_mbps,
            lo_mbps,
            dwell_s,
            phase_s,
        } => {
            if [*hi_mbps, *lo_mbps, *dwell_s]
                .iter()
                .any(|v| *v <= 0.0 || v.is_nan())
            {
                return Err(Error::invalid(
                    "two-state profile parameters must be positive",
                ));
            }
            for i in 0..=steps {
                let t = i as f64 * interval_ms as f64 / 1000.0 + phase_s;
                let hi = (t / dwell_s).floor() as i64 % 2 == 0;
                samples.push((i * interval_ms, if hi { *hi_mbps } else { *lo_mbps }));
            }
        }
        BandwidthProfile::RandomWalk {
            start_mbps,
            min_mbps,
            max_mbps,
            step_frac,
            seed,
        } => {
            if !(*min_mbps > 0.0 && *max_mbps > *min_mbps) {
                return Err(Error::invalid(
                    "random walk bounds must satisfy 0 < min < max",
                ));
            }
            let mut rng = derive_rng(*seed, 0x5A_11);
            let mut rate = start_mbps.clamp(*min_mbps, *max_mbps);
            for i in 0..=steps {
                samples.push((i * interval_ms, rate));
                let factor = 1.0 + rng.gen_range(-*step_frac..=*step_frac);
                rate = reflect(rate * factor, *min_mbps, *max_mbps);
            }
        }
    }
    BandwidthTrace::new(samples)
}

fn reflect(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        (2.0 * lo - x).min(hi)
    } else if x > hi {
        (2.0 * hi - x).max(lo)
    } else {
        x
    }
}

/// Synthetic head-movement profiles.
#[derive(Debug, Clone)]
pub enum HeadProfile {
    /// Fixed gaze.
    Static { yaw_deg: f64, pitch_deg: f64 },
    /// Constant yaw drift from a starting pose.
    Drift {
        start_yaw_deg: f64,
        pitch_deg: f64,
        yaw_rate_deg_s: f64,
    },
    /// One pose per chunk, drawn around one of the attention centers with
    /// uniform jitter. Produces crowds with several distinct viewports.
    HotspotMixture {
        centers: Vec<(f64, f64)>,
        jitter_deg: f64,
        chunk_duration_s: f64,
        seed: u64,
    },
}

pub fn synth_head(profile: &HeadProfile, duration_s: f64, interval_ms: u64) -> Result<HeadTrace> {
    if duration_s <= 0.0 || interval_ms == 0 {
        return Err(Error::invalid(
            "duration and sample interval must be positive",
        ));
    }
    let steps = (duration_s * 1000.0 / interval_ms as f64).ceil() as u64;
    let mut samples = Vec::with_capacity(steps as usize + 1);
    match profile {
        HeadProfile::Static { yaw_deg, pitch_deg } => {
            for i in 0..=steps {
                samples.push((i * interval_ms, Orientation::new(*yaw_deg, *pitch_deg, 0.0)));
            }
        }
        HeadProfile::Drift {
            start_yaw_deg,
            pitch_deg,
            yaw_rate_deg_s,
        } => {
            for i in 0..=steps {
                let t = i as f64 * interval_ms as f64 / 1000.0;
                samples.push((
                    i * interval_ms,
                    Orientation::new(start_yaw_deg + yaw_rate_deg_s * t, *pitch_deg, 0.0),
                ));
            }
        }
        HeadProfile::HotspotMixture {
            centers,
            jitter_deg,
            chunk_duration_s,
            seed,
        } => {
            if centers.is_empty() {
                return Err(Error::invalid("hotspot mixture needs at least one center"));
            }
            if *chunk_duration_s <= 0.0 || chunk_duration_s.is_nan() {
                return Err(Error::invalid(
                    "hotspot mixture needs a positive chunk duration",
                ));
            }
            let mut rng = derive_rng(*seed, 0x8E_AD);
            let chunk_ms = (*chunk_duration_s * 1000.0) as u64;
            let n_chunks = (duration_s / chunk_duration_s).ceil() as usize + 1;
            let poses: Vec<Orientation> = (0..n_chunks)
                .map(|_| {
                    let (cy, cp) = centers[rng.gen_range(0..centers.len())];
                    let dy = rng.gen_range(-*jitter_deg..=*jitter_deg);
                    let dp = rng.gen_range(-*jitter_deg..=*jitter_deg);
                    Orientation::new(cy + dy, cp + dp, 0.0)
                })
                .collect();
            for i in 0..=steps {
                let ts = i * interval_ms;
                let chunk = (ts / chunk_ms.max(1)) as usize;
                samples.push((ts, poses[chunk.min(poses.len() - 1)]));
            }
        }
    }
    HeadTrace::new(samples)
}
