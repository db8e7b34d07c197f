//! Head orientations, viewport-to-tile mapping on the equirectangular grid,
//! per-chunk empirical viewing distributions, and coverage-set construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StreamConfig;
use crate::tol::PROB_EPS;

/// A head pose. Roll is carried for trace fidelity but never used: the
/// viewport model is an axis-aligned yaw/pitch rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
}

impl Orientation {
    pub fn new(yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Self {
        Orientation {
            yaw_deg,
            pitch_deg,
            roll_deg,
        }
    }

    /// Wrap yaw into `[-180, 180)` and clamp pitch into `[-90, 90]`.
    pub fn normalized(&self) -> Self {
        Orientation {
            yaw_deg: (self.yaw_deg + 180.0).rem_euclid(360.0) - 180.0,
            pitch_deg: self.pitch_deg.clamp(-90.0, 90.0),
            roll_deg: self.roll_deg,
        }
    }
}

/// A set of tile indices in `[0, N)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FovSet {
    tiles: BTreeSet<usize>,
}

impl FovSet {
    pub fn new() -> Self {
        FovSet::default()
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn contains(&self, tile: usize) -> bool {
        self.tiles.contains(&tile)
    }

    pub fn insert(&mut self, tile: usize) {
        self.tiles.insert(tile);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.tiles.iter().copied()
    }

    pub fn is_subset(&self, other: &FovSet) -> bool {
        self.tiles.is_subset(&other.tiles)
    }

    pub fn union(&self, other: &FovSet) -> FovSet {
        FovSet {
            tiles: self.tiles.union(&other.tiles).copied().collect(),
        }
    }

    /// Tiles of `self` not in `other`.
    pub fn difference_count(&self, other: &FovSet) -> usize {
        self.tiles.difference(&other.tiles).count()
    }

    /// Bitmask representation; only valid for grids of at most 64 tiles.
    fn mask(&self) -> Option<u64> {
        let mut m = 0u64;
        for &t in &self.tiles {
            if t >= 64 {
                return None;
            }
            m |= 1 << t;
        }
        Some(m)
    }
}

impl FromIterator<usize> for FovSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        FovSet {
            tiles: iter.into_iter().collect(),
        }
    }
}

/// Probability distribution over viewed tile sets, one entry list per chunk.
/// Entries are merged (identical sets summed), sorted, and each chunk's
/// probabilities sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FovModel {
    pub chunks: Vec<Vec<(FovSet, f64)>>,
}

impl FovModel {
    /// Normalize: merge duplicate sets, drop zero-mass entries, sort
    /// canonically, and validate that each chunk sums to one.
    pub fn new(chunks: Vec<Vec<(FovSet, f64)>>) -> Result<Self> {
        let chunks = chunks
            .into_iter()
            .enumerate()
            .map(|(k, dist)| {
                let merged = merge_dist(dist);
                if merged.is_empty() {
                    return Err(Error::invalid(format!(
                        "chunk {k} has an empty distribution"
                    )));
                }
                let total: f64 = merged.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-6 {
                    return Err(Error::invalid(format!(
                        "chunk {k} probabilities sum to {total}, expected 1"
                    )));
                }
                Ok(merged)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FovModel { chunks })
    }

    pub fn chunk(&self, k: usize) -> &[(FovSet, f64)] {
        &self.chunks[k]
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }
}

fn merge_dist(dist: Vec<(FovSet, f64)>) -> Vec<(FovSet, f64)> {
    let mut map: std::collections::BTreeMap<FovSet, f64> = std::collections::BTreeMap::new();
    for (set, p) in dist {
        if p > 0.0 {
            *map.entry(set).or_insert(0.0) += p;
        }
    }
    map.into_iter().collect()
}

/// A tile set covering the viewport with probability at least alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSet {
    pub tiles: FovSet,
    /// Exact probability that a sampled viewport is contained in `tiles`.
    pub coverage: f64,
}

/// Map a head pose to the tiles whose angular rectangle intersects the
/// viewport rectangle `[yaw - h/2, yaw + h/2] x clamp([pitch - v/2,
/// pitch + v/2], -90, 90)`, with longitude wraparound. Roll is ignored.
///
/// Near the poles the latitude interval is clamped, which shrinks it; with a
/// 120x120 viewport on the 4x8 grid the result ranges from 6 tiles (pole,
/// three-column yaw) to 16.
pub fn tiles_in_viewport(pose: Orientation, grid: (usize, usize), extent: (f64, f64)) -> FovSet {
    let (rows, cols) = grid;
    let (h, v) = extent;
    let pose = pose.normalized();
    let tile_w = 360.0 / cols as f64;
    let tile_h = 180.0 / rows as f64;

    let lat_lo = (pose.pitch_deg - v / 2.0).max(-90.0);
    let lat_hi = (pose.pitch_deg + v / 2.0).min(90.0);
    let row_hit: Vec<usize> = (0..rows)
        .filter(|&r| {
            let top = 90.0 - r as f64 * tile_h;
            let bot = top - tile_h;
            overlaps(lat_lo, lat_hi, bot, top)
        })
        .collect();

    let col_hit: Vec<usize> = if h >= 360.0 {
        (0..cols).collect()
    } else {
        // Wrap the longitude interval into pieces inside [-180, 180).
        let lo = pose.yaw_deg - h / 2.0;
        let hi = pose.yaw_deg + h / 2.0;
        let pieces: Vec<(f64, f64)> = if lo < -180.0 {
            vec![(-180.0, hi), (lo + 360.0, 180.0)]
        } else if hi > 180.0 {
            vec![(lo, 180.0), (-180.0, hi - 360.0)]
        } else {
            vec![(lo, hi)]
        };
        (0..cols)
            .filter(|&c| {
                let left = -180.0 + c as f64 * tile_w;
                let right = left + tile_w;
                pieces.iter().any(|&(a, b)| overlaps(a, b, left, right))
            })
            .collect()
    };

    let mut set = FovSet::new();
    for &r in &row_hit {
        for &c in &col_hit {
            set.insert(r * cols + c);
        }
    }
    set
}

/// Open-interval overlap: touching boundaries do not count.
fn overlaps(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> bool {
    a_lo < b_hi && b_lo < a_hi
}

/// Build the per-chunk empirical distribution over viewed tile sets from
/// one head trace per user: each user's pose is sampled at the chunk
/// midpoint, mapped to a tile set, and identical sets are merged under the
/// uniform distribution over users.
pub fn empirical_fov_model(
    head_traces: &[crate::traces::HeadTrace],
    config: &StreamConfig,
) -> Result<FovModel> {
    if head_traces.is_empty() {
        return Err(Error::invalid("need at least one head trace"));
    }
    let k = config.chunk_count;
    let l = config.chunk_duration_s;
    let grid = (config.grid_rows, config.grid_cols);
    let extent = (config.fov_h_deg, config.fov_v_deg);
    let weight = 1.0 / head_traces.len() as f64;

    let mut chunks = Vec::with_capacity(k);
    for chunk in 0..k {
        let mid_ms = (chunk as f64 + 0.5) * l * 1000.0;
        let mut dist = Vec::with_capacity(head_traces.len());
        for trace in head_traces {
            let pose = trace.pose_at_ms(mid_ms)?;
            dist.push((tiles_in_viewport(pose, grid, extent), weight));
        }
        chunks.push(dist);
    }
    FovModel::new(chunks)
}

/// Greedy construction of a tile set containing the sampled viewport with
/// probability at least `alpha`: repeatedly add the uncovered sample whose
/// (new tiles added) / (probability gained) ratio is smallest until the
/// cumulative covered probability reaches `alpha`.
pub fn alpha_set(distribution: &[(FovSet, f64)], alpha: f64) -> Result<AlphaSet> {
    validate_alpha_inputs(distribution, alpha)?;

    let mut chosen = FovSet::new();
    let mut covered = vec![false; distribution.len()];
    let mut coverage = 0.0;

    // Samples already inside the empty set contribute nothing, so coverage
    // starts at zero unless a sample is empty (excluded by validation).
    while coverage + PROB_EPS < alpha {
        let mut best: Option<(f64, f64, usize)> = None; // (ratio, -gain, idx)
        for (i, (set, _)) in distribution.iter().enumerate() {
            if covered[i] {
                continue;
            }
            let candidate = chosen.union(set);
            let new_tiles = set.difference_count(&chosen);
            let gain: f64 = distribution
                .iter()
                .zip(&covered)
                .filter(|((s, _), &c)| !c && s.is_subset(&candidate))
                .map(|((_, p), _)| *p)
                .sum();
            let ratio = new_tiles as f64 / gain;
            let key = (ratio, -gain, i);
            if best.is_none_or(|b| key < (b.0, b.1, b.2)) {
                best = Some(key);
            }
        }
        let (_, _, idx) = best.ok_or_else(|| {
            Error::invalid("distribution exhausted before reaching the coverage target")
        })?;
        chosen = chosen.union(&distribution[idx].0);
        coverage = 0.0;
        for (i, (set, p)) in distribution.iter().enumerate() {
            if set.is_subset(&chosen) {
                covered[i] = true;
                coverage += p;
            }
        }
    }

    Ok(AlphaSet {
        tiles: chosen,
        coverage,
    })
}

/// Exhaustive coverage-set oracle: the minimum-cardinality union of sample
/// sets achieving coverage >= alpha, ties broken by the lexicographically
/// smallest tile set. Refuses more than 20 distinct samples or tiles above
/// index 63 (the enumeration is exponential in the sample count).
pub fn exact_alpha_set(distribution: &[(FovSet, f64)], alpha: f64) -> Result<AlphaSet> {
    validate_alpha_inputs(distribution, alpha)?;
    if distribution.len() > 20 {
        return Err(Error::Refused(format!(
            "{} samples would need {} subset evaluations",
            distribution.len(),
            1u64 << distribution.len()
        )));
    }
    let masks: Vec<u64> = distribution
        .iter()
        .map(|(s, _)| {
            s.mask()
                .ok_or_else(|| Error::Refused("exact solver supports at most 64 tiles".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let probs: Vec<f64> = distribution.iter().map(|(_, p)| *p).collect();

    let mut best: Option<(u32, FovSet, f64)> = None;
    for subset in 0..(1u32 << distribution.len()) {
        let mut union = 0u64;
        for (i, &m) in masks.iter().enumerate() {
            if subset & (1 << i) != 0 {
                union |= m;
            }
        }
        let coverage: f64 = masks
            .iter()
            .zip(&probs)
            .filter(|(&m, _)| m & !union == 0)
            .map(|(_, p)| *p)
            .sum();
        if coverage + PROB_EPS < alpha {
            continue;
        }
        let card = union.count_ones();
        let tiles = FovSet::from_iter((0..64).filter(|&t| union & (1 << t) != 0));
        let better = match &best {
            None => true,
            Some((bc, bt, _)) => card < *bc || (card == *bc && tiles < *bt),
        };
        if better {
            best = Some((card, tiles, coverage));
        }
    }
    let (_, tiles, coverage) =
        best.ok_or_else(|| Error::invalid("no sample union reaches the coverage target"))?;
    Ok(AlphaSet { tiles, coverage })
}

fn validate_alpha_inputs(distribution: &[(FovSet, f64)], alpha: f64) -> Result<()> {
    if distribution.is_empty() {
        return Err(Error::invalid("empty viewport distribution"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha must lie in (0, 1]"));
    }
    if distribution.iter().any(|(s, _)| s.is_empty()) {
        return Err(Error::invalid("viewport samples must be nonempty"));
    }
    if distribution.iter().any(|(_, p)| *p <= 0.0 || p.is_nan()) {
        return Err(Error::invalid("sample probabilities must be positive"));
    }
    let total: f64 = distribution.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!(
            "sample probabilities sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Blend crowd statistics with the live viewport over a lookahead window.
///
/// The first window chunk mixes the live set at `base_weight`; the weight
/// then decays by `w <- w / step` for steps 1, 2, 3, ... down the window,
/// so later chunks lean on the crowd distribution.
pub fn blend_fov(
    crowd: &FovModel,
    current: &FovSet,
    base_weight: f64,
    first_chunk: usize,
    window: usize,
) -> Result<FovModel> {
    if !(0.0..=1.0).contains(&base_weight) {
        return Err(Error::invalid("blend weight must lie in [0, 1]"));
    }
    let last = (first_chunk + window).min(crowd.len());
    if first_chunk >= last {
        return Err(Error::invalid("blend window is empty"));
    }
    let mut w = if current.is_empty() { 0.0 } else { base_weight };
    let mut chunks = Vec::with_capacity(last - first_chunk);
    for (step, k) in (first_chunk..last).enumerate() {
        if step > 0 {
            w /= step as f64;
        }
        let mut dist: Vec<(FovSet, f64)> = crowd
            .chunk(k)
            .iter()
            .map(|(s, p)| (s.clone(), (1.0 - w) * p))
            .collect();
        if w > 0.0 {
            dist.push((current.clone(), w));
        }
        chunks.push(dist);
    }
    FovModel::new(chunks)
}
