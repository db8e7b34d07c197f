use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use robust360_core::traces::{synth_bandwidth, synth_head, BandwidthProfile, HeadProfile};

use crate::io_formats::write_atomic;

#[derive(Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Trace duration in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    /// Sample spacing in milliseconds.
    #[arg(long, default_value_t = 100)]
    pub interval_ms: u64,
    /// Bandwidth profile: `constant:MBPS`, `twostate:HI,LO,DWELL[,PHASE]`,
    /// or `walk:START,MIN,MAX,STEP`.
    #[arg(long)]
    pub bw: Option<String>,
    /// Head profile: `static:YAW,PITCH`, `drift:YAW,PITCH,RATE`, or
    /// `hotspots:Y1,P1[;Y2,P2...][@JITTER]`.
    #[arg(long)]
    pub head: Option<String>,
    /// Number of head traces to emit (per-user seeds vary).
    #[arg(long, default_value_t = 1)]
    pub users: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Chunk duration used by the hotspot profile.
    #[arg(long, default_value_t = 2.0)]
    pub chunk_s: f64,
    /// File-name prefix for head traces.
    #[arg(long, default_value = "user")]
    pub prefix: String,
}

pub fn execute(args: SynthArgs) -> Result<()> {
    if args.bw.is_none() && args.head.is_none() {
        bail!("nothing to generate: give --bw and/or --head");
    }
    std::fs::create_dir_all(&args.out)?;

    if let Some(spec) = &args.bw {
        let profile = parse_bw_profile(spec, args.seed)?;
        let trace = synth_bandwidth(&profile, args.duration, args.interval_ms)?;
        let path = args.out.join("bandwidth.bw.csv");
        write_atomic(&path, trace.to_csv().as_bytes())?;
        println!(
            "bandwidth trace ({} samples) -> {}",
            trace.samples.len(),
            path.display()
        );
    }

    if let Some(spec) = &args.head {
        for user in 0..args.users {
            let profile = parse_head_profile(spec, args.seed + user, args.chunk_s)?;
            let trace = synth_head(&profile, args.duration, args.interval_ms)?;
            let path = args.out.join(format!("{}_{user:03}.head.csv", args.prefix));
            write_atomic(&path, trace.to_csv().as_bytes())?;
        }
        println!("{} head trace(s) -> {}", args.users, args.out.display());
    }
    Ok(())
}

fn split_numbers(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {v:?}"))
        })
        .collect()
}

fn parse_bw_profile(spec: &str, seed: u64) -> Result<BandwidthProfile> {
    let (kind, rest) = spec
        .split_once(':')
        .with_context(|| format!("profile {spec:?} needs kind:params"))?;
    let nums = split_numbers(rest)?;
    match (kind, nums.as_slice()) {
        ("constant", [mbps]) => Ok(BandwidthProfile::Constant { mbps: *mbps }),
        ("twostate", [hi, lo, dwell]) => Ok(BandwidthProfile::TwoState {
            hi_mbps: *hi,
            lo_mbps: *lo,
            dwell_s: *dwell,
            phase_s: 0.0,
        }),
        ("twostate", [hi, lo, dwell, phase]) => Ok(BandwidthProfile::TwoState {
            hi_mbps: *hi,
            lo_mbps: *lo,
            dwell_s: *dwell,
            phase_s: *phase,
        }),
        ("walk", [start, min, max, step]) => Ok(BandwidthProfile::RandomWalk {
            start_mbps: *start,
            min_mbps: *min,
            max_mbps: *max,
            step_frac: *step,
            seed,
        }),
        _ => bail!("unrecognized bandwidth profile {spec:?}"),
    }
}

fn parse_head_profile(spec: &str, seed: u64, chunk_s: f64) -> Result<HeadProfile> {
    let (kind, rest) = spec
        .split_once(':')
        .with_context(|| format!("profile {spec:?} needs kind:params"))?;
    match kind {
        "static" => {
            let nums = split_numbers(rest)?;
            let [yaw, pitch] = nums.as_slice() else {
                bail!("static profile needs YAW,PITCH");
            };
            Ok(HeadProfile::Static {
                yaw_deg: *yaw,
                pitch_deg: *pitch,
            })
        }
        "drift" => {
            let nums = split_numbers(rest)?;
            let [yaw, pitch, rate] = nums.as_slice() else {
                bail!("drift profile needs YAW,PITCH,RATE");
            };
            Ok(HeadProfile::Drift {
                start_yaw_deg: *yaw,
                pitch_deg: *pitch,
                yaw_rate_deg_s: *rate,
            })
        }
        "hotspots" => {
            let (centers_raw, jitter) = match rest.split_once('@') {
                Some((c, j)) => (c, j.trim().parse::<f64>().context("bad jitter")?),
                None => (rest, 10.0),
            };
            let centers = centers_raw
                .split(';')
                .map(|pair| {
                    let nums = split_numbers(pair)?;
                    let [yaw, pitch] = nums.as_slice() else {
                        bail!("each hotspot needs YAW,PITCH");
                    };
                    Ok((*yaw, *pitch))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(HeadProfile::HotspotMixture {
                centers,
                jitter_deg: jitter,
                chunk_duration_s: chunk_s,
                seed,
            })
        }
        _ => bail!("unrecognized head profile {spec:?}"),
    }
}
