//! On-disk formats shared by the subcommands: the crowd-model JSON, the
//! per-session artifacts, and the oracle instance file.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use robust360_core::fov::{FovModel, FovSet};
use robust360_core::model::{QoEBreakdown, StreamConfig};
use robust360_core::online::{Policy, SessionResult};
use robust360_core::relax::RelaxedInstance;

pub const SCHEMA_VERSION: u32 = 1;

/// Crowd viewport model: per chunk, a list of `{tiles, p}` entries.
#[derive(Serialize, Deserialize)]
pub struct CrowdModelFile {
    pub schema_version: u32,
    pub chunks: Vec<Vec<CrowdEntry>>,
}

#[derive(Serialize, Deserialize)]
pub struct CrowdEntry {
    pub tiles: Vec<usize>,
    pub p: f64,
}

impl CrowdModelFile {
    pub fn from_model(model: &FovModel) -> Self {
        CrowdModelFile {
            schema_version: SCHEMA_VERSION,
            chunks: model
                .chunks
                .iter()
                .map(|dist| {
                    dist.iter()
                        .map(|(set, p)| CrowdEntry {
                            tiles: set.iter().collect(),
                            p: *p,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn into_model(self) -> Result<FovModel> {
        let chunks = self
            .chunks
            .into_iter()
            .map(|dist| {
                dist.into_iter()
                    .map(|e| (FovSet::from_iter(e.tiles), e.p))
                    .collect()
            })
            .collect();
        Ok(FovModel::new(chunks)?)
    }
}

pub fn load_crowd_model(path: &Path) -> Result<FovModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read crowd model {}", path.display()))?;
    let file: CrowdModelFile = serde_json::from_str(&text)
        .with_context(|| format!("bad crowd model {}", path.display()))?;
    file.into_model()
}

pub fn save_crowd_model(model: &FovModel, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&CrowdModelFile::from_model(model))?;
    write_atomic(path, text.as_bytes())
}

pub fn load_config(path: &Path) -> Result<StreamConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let config: StreamConfig =
        serde_json::from_str(&text).with_context(|| format!("bad config {}", path.display()))?;
    config.validate()?;
    Ok(config)
}

/// Session summary written next to the decision log. Every field except
/// `mean_decision_ms` is a deterministic function of the inputs and seed.
#[derive(Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub policy: String,
    pub seed: u64,
    pub chunk_count: usize,
    pub qoe: QoEBreakdown,
    pub robust_qoe: QoEBreakdown,
    pub stall_s: f64,
    pub guaranteed_rate_p95: f64,
    pub mean_decision_ms: f64,
}

impl Summary {
    pub fn from_result(result: &SessionResult, policy: Policy, seed: u64) -> Self {
        Summary {
            schema_version: SCHEMA_VERSION,
            policy: policy.name().to_string(),
            seed,
            chunk_count: result.committed_gamma.len(),
            qoe: result.qoe_realized.clone(),
            robust_qoe: result.qoe_robust.clone(),
            stall_s: result.stall_s,
            guaranteed_rate_p95: result.guaranteed_rate_p95,
            mean_decision_ms: result.mean_decision_ms(),
        }
    }
}

/// Per-chunk decision log: one row per chunk, stable float formatting.
pub fn decisions_csv(result: &SessionResult, config: &StreamConfig) -> String {
    let mut out = String::from(
        "chunk,gamma,tile_min,tile_max,download_start_s,download_end_s,stall_to_date_s\n",
    );
    let l = config.chunk_duration_s;
    for c in 0..result.committed_gamma.len() {
        // start[c] is chunk c's begin; its finish is the next begin minus
        // the post-download wait (zero after the last chunk).
        let start = result.timeline.start[c];
        let end = result.timeline.start[c + 1] - result.timeline.wait[c];
        let stall_to_date =
            (result.timeline.play[c] - (config.startup_delay_s + c as f64 * l)).max(0.0);
        out.push_str(&format!(
            "{c},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            result.committed_gamma[c],
            result.tile_min[c],
            result.tile_max[c],
            start,
            end,
            stall_to_date,
        ));
    }
    out
}

/// Oracle input: one decision instance plus the encoding ladder.
#[derive(Serialize, Deserialize)]
pub struct InstanceFile {
    pub instance: RelaxedInstance,
    pub ladder_mbps: Vec<f64>,
}

pub fn load_instance(path: &Path) -> Result<InstanceFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read instance {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("bad instance file {}", path.display()))
}

/// Write through a temp file then rename, so partial output never lands
/// under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move into {}", path.display()))?;
    Ok(())
}
