pub mod crowd;
pub mod oracle;
pub mod run;
pub mod sweep;
pub mod synth;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use robust360_core::traces::{parse_bandwidth_trace, parse_head_trace};
use robust360_core::{BandwidthTrace, HeadTrace};

pub fn read_bandwidth(path: &Path) -> Result<BandwidthTrace> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open bandwidth trace {}", path.display()))?;
    parse_bandwidth_trace(std::io::BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn read_head(path: &Path) -> Result<HeadTrace> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open head trace {}", path.display()))?;
    parse_head_trace(std::io::BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

/// Expand a glob pattern or directory into a sorted list of head traces
/// (`.head.csv` files when a directory is given).
pub fn head_trace_paths(pattern: &str) -> Result<Vec<PathBuf>> {
    let as_path = Path::new(pattern);
    let mut paths: Vec<PathBuf> = if as_path.is_dir() {
        std::fs::read_dir(as_path)
            .with_context(|| format!("cannot list {}", as_path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".head.csv"))
            .collect()
    } else {
        glob::glob(pattern)
            .with_context(|| format!("bad glob pattern {pattern:?}"))?
            .collect::<std::result::Result<Vec<_>, _>>()?
    };
    paths.sort();
    if paths.is_empty() {
        bail!("no head traces matched {pattern:?}");
    }
    Ok(paths)
}

/// Parse seed specs: either a comma list (`1,2,3`) or a range (`0..20`).
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse().context("bad seed range start")?;
        let hi: u64 = hi.trim().parse().context("bad seed range end")?;
        if hi <= lo {
            bail!("empty seed range {spec:?}");
        }
        return Ok((lo..hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed {s:?}"))
        })
        .collect()
}
