//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the lines.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robust360_core::fov::{alpha_set, empirical_fov_model, exact_alpha_set, FovModel, FovSet};
use robust360_core::model::{RateLadder, StreamConfig, UtilitySpec};
use robust360_core::online::{simulate_session, Perturbations, Policy, SessionResult};
use robust360_core::oracle::{brute_force_discrete, grid_search_relaxed};
use robust360_core::quantize::{gap_bound, robust_quantize};
use robust360_core::relax::{solve_relaxed, RelaxedInstance};
use robust360_core::traces::{synth_bandwidth, synth_head, BandwidthProfile, HeadProfile};

fn pass(name: &str, detail: String) {
    println!("criterion {name}: PASS — {detail}");
}

/// Small offline instances with per-instance constant bandwidth and
/// covered-set size and a non-binding buffer: the setting in which the
/// bank-and-spend quantizer's rate bookkeeping converts one-to-one into
/// schedule time (see the recheck tests for what breaks outside it).
fn random_instance(seed: u64, fixed_ladder: Option<&RateLadder>) -> (RelaxedInstance, RateLadder) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=5usize);
    let ladder = match fixed_ladder {
        Some(l) => l.clone(),
        None => {
            let mut levels = vec![rng.gen_range(0.1..0.5)];
            for _ in 0..rng.gen_range(1..=3usize) {
                let next = levels.last().unwrap() + rng.gen_range(0.05..0.6);
                levels.push(next);
            }
            RateLadder::new(levels).unwrap()
        }
    };
    let n = rng.gen_range(2..=4usize);
    let card = rng.gen_range(1..=n);
    let mid = 0.5 * (ladder.min_rate() + ladder.max_rate());
    let bandwidth = rng.gen_range(0.3..2.5) * n as f64 * mid;
    let chunk_duration = *[1.0, 2.0].choose(&mut rng).unwrap();
    let lambda = *[0.0, 1.0, 10.0, 100.0].choose(&mut rng).unwrap();
    let t_ini = rng.gen_range(0.2..2.0);
    let instance = RelaxedInstance::offline(
        vec![card; k],
        n,
        vec![bandwidth; k],
        ladder.min_rate(),
        ladder.max_rate(),
        lambda,
        0.0,
        UtilitySpec::Linear,
        chunk_duration,
        k, // buffer never binds
        t_ini,
    )
    .unwrap();
    (instance, ladder)
}

#[test]
fn criterion_1_sandwich_and_gap_bound() {
    let started = Instant::now();
    let mut worst_gap_slack = f64::INFINITY;
    for seed in 0..1000u64 {
        let (inst, ladder) = random_instance(seed, None);
        let relaxed = solve_relaxed(&inst).unwrap();
        relaxed.verify(&inst).unwrap();
        let discrete = brute_force_discrete(&inst, &ladder).unwrap();
        let qt = robust_quantize(&relaxed.gamma, &ladder).unwrap();
        let quantized_value = inst.objective_value(&qt.gamma_final);

        assert!(
            relaxed.objective + 1e-6 >= discrete.objective,
            "seed {seed}: relaxed {} < discrete {}",
            relaxed.objective,
            discrete.objective
        );
        assert!(
            discrete.objective + 1e-6 >= quantized_value,
            "seed {seed}: discrete {} < quantized {}",
            discrete.objective,
            quantized_value
        );
        let bound = gap_bound(&ladder, inst.count(), &UtilitySpec::Linear);
        let gap = relaxed.objective - quantized_value;
        assert!(
            gap <= bound + 1e-6,
            "seed {seed}: gap {gap} exceeds bound {bound}"
        );
        worst_gap_slack = worst_gap_slack.min(bound - gap);
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "suite took {elapsed:.1} s");
    pass(
        "1 (sandwich + quantization gap bound)",
        format!("1000 instances in {elapsed:.1} s, min bound slack {worst_gap_slack:.3e}"),
    );
}

#[test]
fn criterion_2_stall_preservation() {
    let mut checked = 0;
    for seed in 0..1000u64 {
        let (inst, ladder) = random_instance(seed, None);
        let relaxed = solve_relaxed(&inst).unwrap();
        let qt = robust_quantize(&relaxed.gamma, &ladder).unwrap();
        let relaxed_t = inst.window_timeline(&relaxed.gamma);
        let quantized_t = inst.window_timeline(&qt.gamma_final);
        let last = inst.count() - 1;
        assert!(
            quantized_t.play[last] <= relaxed_t.play[last] + 1e-9,
            "seed {seed}: quantized stall {} > relaxed stall {}",
            quantized_t.play[last],
            relaxed_t.play[last]
        );
        checked += 1;
    }
    pass(
        "2 (quantization preserves stall)",
        format!("{checked}/1000 instances"),
    );
}

#[test]
fn criterion_3_gap_at_most_one_ladder_step() {
    let ladder = RateLadder::new(vec![0.25, 0.5, 0.75, 1.0]).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..1000u64 {
        let (inst, ladder) = random_instance(seed, Some(&ladder));
        let relaxed = solve_relaxed(&inst).unwrap();
        let qt = robust_quantize(&relaxed.gamma, &ladder).unwrap();
        // Utility term only (linear utility: the sum of rates).
        let utility_gap: f64 = relaxed
            .gamma
            .iter()
            .zip(&qt.gamma_final)
            .map(|(s, f)| s - f)
            .sum();
        assert!(
            utility_gap <= 0.25 + 1e-6,
            "seed {seed}: utility gap {utility_gap}"
        );
        worst = worst.max(utility_gap);
    }
    pass(
        "3 (utility gap <= 0.25 on the quarter-step ladder)",
        format!("worst observed gap {worst:.4}"),
    );
}

#[test]
fn criterion_4_lp_matches_grid_search() {
    // The two-chunk hand instance first.
    let hand = RelaxedInstance::offline(
        vec![2, 2],
        2,
        vec![1.0, 1.0],
        0.25,
        1.0,
        100.0,
        0.0,
        UtilitySpec::Linear,
        2.0,
        2,
        1.0,
    )
    .unwrap();
    let sol = solve_relaxed(&hand).unwrap();
    assert!((sol.gamma[0] - 0.25).abs() < 1e-3, "{:?}", sol.gamma);
    assert!((sol.gamma[1] - 0.5).abs() < 1e-3, "{:?}", sol.gamma);
    assert!((sol.objective - 0.75).abs() < 1e-3);

    // A 0.005 grid can only certify the LP to 1e-3 when the optimum sits
    // on the grid, so the family is built with grid-multiple ladder bounds
    // and bandwidth/startup chosen to put every binding rate on the grid.
    // Spans are also capped to keep the dense search within its budget.
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + seed);
        let k = rng.gen_range(2..=3usize);
        let r0 = 0.005 * rng.gen_range(40..=80) as f64;
        let steps = rng.gen_range(60..=150usize);
        let rm = r0 + 0.005 * steps as f64;
        let n = rng.gen_range(2..=4usize);
        let card = rng.gen_range(1..=n);
        let base_part = (n - card) as f64 * r0;
        let (bandwidth, t_ini, lambda) = if seed % 5 == 0 {
            // Abundance: the optimum saturates at the (grid-point) ceiling.
            (
                n as f64 * rm * rng.gen_range(2.0..10.0),
                rng.gen_range(0.5..2.0),
                *[0.0, 10.0, 100.0].choose(&mut rng).unwrap(),
            )
        } else {
            // Steady-state binding rate v and startup binding rate v1,
            // both grid points (v = r0 is starvation).
            let v = r0 + 0.005 * rng.gen_range(0..=steps) as f64;
            let v1 = r0 + 0.005 * rng.gen_range(0..=steps) as f64;
            let c = card as f64 * v + base_part;
            let t_ini = 2.0 * (card as f64 * v1 + base_part) / c;
            (c, t_ini, *[10.0, 100.0].choose(&mut rng).unwrap())
        };
        let inst = RelaxedInstance::offline(
            vec![card; k],
            n,
            vec![bandwidth; k],
            r0,
            rm,
            lambda,
            0.0,
            UtilitySpec::Linear,
            2.0,
            k,
            t_ini,
        )
        .unwrap();
        let lp = solve_relaxed(&inst).unwrap();
        let grid = grid_search_relaxed(&inst, 0.005).unwrap();
        let diff = (lp.objective - grid.objective).abs();
        assert!(
            lp.objective + 1e-9 >= grid.objective,
            "seed {seed}: grid beat the LP by {}",
            grid.objective - lp.objective
        );
        assert!(diff < 1e-3, "seed {seed}: |LP - grid| = {diff}");
        worst = worst.max(diff);
    }
    pass(
        "4 (LP vs dense grid search)",
        format!("hand instance exact; 100 instances, worst |LP - grid| {worst:.2e}"),
    );
}

#[test]
fn criterion_5_coverage_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..100u64 {
        let n_tiles = rng.gen_range(4..=12usize);
        let n_samples = rng.gen_range(1..=20.min(1 << n_tiles.min(5)));
        let mut dist: Vec<(FovSet, f64)> = Vec::new();
        let mut weights = Vec::new();
        for _ in 0..n_samples {
            let size = rng.gen_range(1..=n_tiles.min(4));
            let mut tiles = FovSet::new();
            while tiles.len() < size {
                tiles.insert(rng.gen_range(0..n_tiles));
            }
            dist.push((tiles, 0.0));
            weights.push(rng.gen_range(1..20) as f64);
        }
        let total: f64 = weights.iter().sum();
        for (entry, w) in dist.iter_mut().zip(&weights) {
            entry.1 = w / total;
        }
        let alpha = if case % 10 == 0 {
            1.0
        } else {
            rng.gen_range(0.4..1.0)
        };

        let greedy = alpha_set(&dist, alpha).unwrap();
        assert!(
            greedy.coverage + 1e-9 >= alpha,
            "case {case}: greedy coverage {} < {alpha}",
            greedy.coverage
        );

        let exact = exact_alpha_set(&dist, alpha).unwrap();
        assert!(greedy.tiles.len() >= exact.tiles.len(), "case {case}");

        // Independent oracle: enumerate every tile subset directly.
        let best = enumerate_tile_subsets(&dist, alpha, n_tiles);
        assert_eq!(exact.tiles, best.0, "case {case}: exact solver mismatch");
        assert!((exact.coverage - best.1).abs() < 1e-9, "case {case}");
    }
    pass(
        "5 (coverage-set construction)",
        "greedy covers alpha on 100 cases; exact solver matches full tile-subset enumeration"
            .into(),
    );
}

/// Reference enumeration over all 2^N tile subsets (not just sample
/// unions): minimum cardinality, ties to the lexicographically smallest.
fn enumerate_tile_subsets(dist: &[(FovSet, f64)], alpha: f64, n_tiles: usize) -> (FovSet, f64) {
    let mut best: Option<(usize, FovSet, f64)> = None;
    for mask in 0u64..(1 << n_tiles) {
        let set = FovSet::from_iter((0..n_tiles).filter(|t| mask & (1 << t) != 0));
        let coverage: f64 = dist
            .iter()
            .filter(|(s, _)| s.is_subset(&set))
            .map(|(_, p)| p)
            .sum();
        if coverage + 1e-9 < alpha {
            continue;
        }
        let card = set.len();
        let better = match &best {
            None => true,
            Some((bc, bt, _)) => card < *bc || (card == *bc && set < *bt),
        };
        if better {
            best = Some((card, set, coverage));
        }
    }
    let (_, tiles, coverage) = best.expect("total probability reaches any alpha <= 1");
    (tiles, coverage)
}

/// The deterministic separation scenario: 12.5 Mbps supports the 16-tile
/// covered set at 0.5 plus the complement at 0.25 (24 Mbit per 2 s chunk)
/// but not the whole 32-tile chunk above 0.25 (uniform 0.5 needs 32 Mbit).
fn separation_config() -> StreamConfig {
    StreamConfig {
        chunk_count: 12,
        chunk_duration_s: 2.0,
        grid_rows: 4,
        grid_cols: 8,
        fov_h_deg: 120.0,
        fov_v_deg: 120.0,
        alpha: 0.95,
        lambda_per_s: 100.0,
        eta_per_mbps: 0.0,
        window_chunks: 5,
        buffer_chunks: 1,
        startup_delay_s: 1.5,
        warmup_chunks: 2,
        ..StreamConfig::default()
    }
}

fn run_separation(policy: Policy) -> SessionResult {
    let config = separation_config();
    let duration = 40.0;
    let bw = synth_bandwidth(&BandwidthProfile::Constant { mbps: 12.5 }, duration, 10).unwrap();
    let head = synth_head(
        &HeadProfile::Static {
            yaw_deg: 0.0,
            pitch_deg: 0.0,
        },
        duration,
        100,
    )
    .unwrap();
    let crowd_traces: Vec<_> = (0..40)
        .map(|_| {
            synth_head(
                &HeadProfile::Static {
                    yaw_deg: 0.0,
                    pitch_deg: 0.0,
                },
                duration,
                100,
            )
            .unwrap()
        })
        .collect();
    let crowd = empirical_fov_model(&crowd_traces, &config).unwrap();
    simulate_session(
        &config,
        &bw,
        &head,
        &crowd,
        policy,
        &Perturbations::default(),
        7,
    )
    .unwrap()
}

#[test]
fn criterion_6_separation_scenario() {
    let config = separation_config();
    let robust = run_separation(Policy::Robust360);
    let ba1 = run_separation(Policy::Ba1);
    let ba2 = run_separation(Policy::Ba2);

    for c in config.warmup_chunks..config.chunk_count {
        assert!(
            robust.realized_rate[c] - ba1.realized_rate[c] >= 0.25 - 1e-9,
            "chunk {c}: robust {} vs ba1 {}",
            robust.realized_rate[c],
            ba1.realized_rate[c]
        );
        assert!(
            robust.realized_rate[c] - ba2.realized_rate[c] >= 0.25 - 1e-9,
            "chunk {c}: robust {} vs ba2 {}",
            robust.realized_rate[c],
            ba2.realized_rate[c]
        );
    }
    assert!(robust.qoe_realized.total > ba1.qoe_realized.total);
    assert!(robust.qoe_realized.total > ba2.qoe_realized.total);
    pass(
        "6 (separation scenario)",
        format!(
            "robust {:.2} QoE vs ba1 {:.2} / ba2 {:.2}; one-level rate margin on every post-warmup chunk",
            robust.qoe_realized.total, ba1.qoe_realized.total, ba2.qoe_realized.total
        ),
    );
}

// ---------------------------------------------------------------------
// Trend criteria: directional comparisons over 20 seeds, one-sided sign
// test at p < 0.05. Ties count toward the hypothesized direction (the
// hypotheses are "nonincreasing"/"no worse", which ties satisfy).
// ---------------------------------------------------------------------

fn sign_test_passes(successes: usize, n: usize) -> bool {
    // P(X >= successes | Binomial(n, 1/2)) < 0.05
    let mut tail = 0.0f64;
    for i in successes..=n {
        tail += binomial(n, i);
    }
    tail / 2f64.powi(n as i32) < 0.05
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

struct TrendWorld {
    config: StreamConfig,
    bw: robust360_core::BandwidthTrace,
    head: robust360_core::HeadTrace,
    crowd: FovModel,
}

fn trend_world(seed: u64, profile: BandwidthProfile) -> TrendWorld {
    trend_world_sized(seed, profile, 24)
}

fn trend_world_sized(seed: u64, profile: BandwidthProfile, chunk_count: usize) -> TrendWorld {
    let config = StreamConfig {
        chunk_count,
        chunk_duration_s: 2.0,
        grid_rows: 4,
        grid_cols: 8,
        alpha: 0.95,
        lambda_per_s: 100.0,
        eta_per_mbps: 1.0,
        window_chunks: 5,
        buffer_chunks: chunk_count,
        startup_delay_s: 1.0,
        warmup_chunks: 2,
        ..StreamConfig::default()
    };
    let duration = chunk_count as f64 * 2.0 + 42.0;
    let bw = synth_bandwidth(&profile, duration, 50).unwrap();
    let head = synth_head(
        &HeadProfile::HotspotMixture {
            centers: vec![(0.0, 0.0), (120.0, 10.0)],
            jitter_deg: 10.0,
            chunk_duration_s: 2.0,
            seed: seed ^ 0xFACE,
        },
        duration,
        100,
    )
    .unwrap();
    let crowd_traces: Vec<_> = (0..12)
        .map(|u| {
            synth_head(
                &HeadProfile::HotspotMixture {
                    centers: vec![(0.0, 0.0), (120.0, 10.0)],
                    jitter_deg: 10.0,
                    chunk_duration_s: 2.0,
                    seed: seed.wrapping_mul(97).wrapping_add(u),
                },
                duration,
                100,
            )
            .unwrap()
        })
        .collect();
    let crowd = empirical_fov_model(&crowd_traces, &config).unwrap();
    TrendWorld {
        config,
        bw,
        head,
        crowd,
    }
}

// The walk floor sits above the 8 Mbps all-base budget: unperturbed runs
// stay essentially stall-free, so rate/variation trade-offs (7a, 7d) and
// estimation-error effects (7c) are not drowned by baseline stall noise.
fn walk_profile(seed: u64) -> BandwidthProfile {
    BandwidthProfile::RandomWalk {
        start_mbps: 14.0,
        min_mbps: 9.5,
        max_mbps: 22.0,
        step_frac: 0.12,
        seed,
    }
}

#[test]
fn criterion_7a_qoe_nonincreasing_in_eta() {
    let etas = [0.0, 1.0, 2.0, 4.0];
    let seeds = 20u64;
    let mut successes = vec![0usize; etas.len() - 1];
    for seed in 0..seeds {
        let world = trend_world(seed, walk_profile(seed));
        let mut totals = Vec::new();
        for &eta in &etas {
            let mut config = world.config.clone();
            config.eta_per_mbps = eta;
            let r = simulate_session(
                &config,
                &world.bw,
                &world.head,
                &world.crowd,
                Policy::Robust360,
                &Perturbations::default(),
                seed,
            )
            .unwrap();
            assert_floor(&r);
            totals.push(r.qoe_realized.total);
        }
        for (i, pair) in totals.windows(2).enumerate() {
            if pair[1] <= pair[0] + 1e-9 {
                successes[i] += 1;
            }
        }
    }
    for (i, &s) in successes.iter().enumerate() {
        assert!(
            sign_test_passes(s, seeds as usize),
            "eta {} -> {}: only {s}/{seeds} nonincreasing",
            etas[i],
            etas[i + 1]
        );
    }
    pass(
        "7a (QoE nonincreasing in the variation weight)",
        format!("successes per step: {successes:?} of {seeds}"),
    );
}

#[test]
fn criterion_7b_stall_nonincreasing_in_window() {
    let windows = [1usize, 2, 5, 10];
    let seeds = 20u64;
    let mut successes = vec![0usize; windows.len() - 1];
    for seed in 0..seeds {
        // Bursty square wave; the phase shifts per seed.
        let profile = BandwidthProfile::TwoState {
            hi_mbps: 14.0,
            lo_mbps: 5.0,
            dwell_s: 6.0,
            phase_s: seed as f64 * 0.7,
        };
        let world = trend_world(seed, profile);
        let mut stalls = Vec::new();
        for &w in &windows {
            let mut config = world.config.clone();
            config.window_chunks = w;
            config.eta_per_mbps = 0.0;
            let r = simulate_session(
                &config,
                &world.bw,
                &world.head,
                &world.crowd,
                Policy::Robust360,
                &Perturbations::default(),
                seed,
            )
            .unwrap();
            assert_floor(&r);
            stalls.push(r.stall_s);
        }
        for (i, pair) in stalls.windows(2).enumerate() {
            if pair[1] <= pair[0] + 1e-9 {
                successes[i] += 1;
            }
        }
    }
    for (i, &s) in successes.iter().enumerate() {
        assert!(
            sign_test_passes(s, seeds as usize),
            "W {} -> {}: only {s}/{seeds} nonincreasing",
            windows[i],
            windows[i + 1]
        );
    }
    pass(
        "7b (stall nonincreasing in the window size)",
        format!("successes per step: {successes:?} of {seeds}"),
    );
}

#[test]
fn criterion_7c_bandwidth_error_hurts_the_greedy_baseline_more() {
    // Longer sessions and a slower walk than the other trend scenarios:
    // the degradation signal is the error-sweep curve, and per-seed timing
    // luck (amplified by lambda = 100) must not drown it. Each cell
    // averages over three perturbation draws; the per-seed statistic is
    // the total degradation across the swept error levels.
    let errors = [0.2, 0.4];
    let seeds = 20u64;
    let mut curve_successes = 0usize;
    let mut mean_drop_robust = vec![0.0f64; errors.len()];
    let mut mean_drop_ba2 = vec![0.0f64; errors.len()];
    for seed in 0..seeds {
        let profile = BandwidthProfile::RandomWalk {
            start_mbps: 13.0,
            min_mbps: 10.0,
            max_mbps: 20.0,
            step_frac: 0.04,
            seed,
        };
        let world = trend_world_sized(seed, profile, 48);

        let run = |policy: Policy, e: f64| {
            let draws = if e == 0.0 { 1 } else { 3 };
            let mut total = 0.0;
            for draw in 0..draws {
                let r = simulate_session(
                    &world.config,
                    &world.bw,
                    &world.head,
                    &world.crowd,
                    policy,
                    &Perturbations {
                        bw_error: e,
                        fov_fidelity: 1.0,
                    },
                    seed * 8 + draw,
                )
                .unwrap();
                assert_floor(&r);
                total += r.qoe_realized.total;
            }
            total / draws as f64
        };
        let robust_base = run(Policy::Robust360, 0.0);
        let ba2_base = run(Policy::Ba2, 0.0);
        let mut robust_curve = 0.0;
        let mut ba2_curve = 0.0;
        for (i, &e) in errors.iter().enumerate() {
            let dr = robust_base - run(Policy::Robust360, e);
            let db = ba2_base - run(Policy::Ba2, e);
            robust_curve += dr;
            ba2_curve += db;
            mean_drop_robust[i] += dr / seeds as f64;
            mean_drop_ba2[i] += db / seeds as f64;
        }
        if robust_curve < ba2_curve {
            curve_successes += 1;
        }
    }
    assert!(
        sign_test_passes(curve_successes, seeds as usize),
        "only {curve_successes}/{seeds} seeds degraded less than ba2 across the sweep"
    );
    for (i, &e) in errors.iter().enumerate() {
        assert!(
            mean_drop_robust[i] < mean_drop_ba2[i],
            "e = {e}: mean degradation {} not below ba2's {}",
            mean_drop_robust[i],
            mean_drop_ba2[i]
        );
    }
    pass(
        "7c (degradation under bandwidth error smaller than ba2's)",
        format!(
            "curve direction on {curve_successes}/{seeds} seeds; mean drops {:.1?} vs ba2 {:.1?}",
            mean_drop_robust, mean_drop_ba2
        ),
    );
}

#[test]
fn criterion_7d_guaranteed_rate_under_viewport_noise() {
    let betas = [1.0, 0.75, 0.5, 0.25];
    let seeds = 20u64;
    let mut successes = vec![0usize; betas.len() - 1];
    let mut at_full_fidelity = 0usize;
    for seed in 0..seeds {
        let world = trend_world(seed, walk_profile(seed));
        let run = |policy: Policy, beta: f64| {
            let r = simulate_session(
                &world.config,
                &world.bw,
                &world.head,
                &world.crowd,
                policy,
                &Perturbations {
                    bw_error: 0.0,
                    fov_fidelity: beta,
                },
                seed,
            )
            .unwrap();
            assert_floor(&r);
            r.guaranteed_rate_p95
        };
        let rates: Vec<f64> = betas.iter().map(|&b| run(Policy::Robust360, b)).collect();
        for (i, pair) in rates.windows(2).enumerate() {
            if pair[1] <= pair[0] + 1e-9 {
                successes[i] += 1;
            }
        }
        let ba1 = run(Policy::Ba1, 1.0);
        let ba2 = run(Policy::Ba2, 1.0);
        if rates[0] + 1e-9 >= ba1 && rates[0] + 1e-9 >= ba2 {
            at_full_fidelity += 1;
        }
    }
    for (i, &s) in successes.iter().enumerate() {
        assert!(
            sign_test_passes(s, seeds as usize),
            "beta {} -> {}: only {s}/{seeds} nonincreasing",
            betas[i],
            betas[i + 1]
        );
    }
    assert!(
        sign_test_passes(at_full_fidelity, seeds as usize),
        "only {at_full_fidelity}/{seeds} seeds kept the guaranteed rate at or above the baselines"
    );
    pass(
        "7d (guaranteed rate vs viewport fidelity)",
        format!(
            "successes per step: {successes:?}; >= baselines on {at_full_fidelity}/{seeds} seeds"
        ),
    );
}

fn assert_floor(result: &SessionResult) {
    assert!(
        result.realized_rate.iter().all(|&r| r >= 0.25 - 1e-12),
        "realized rate fell below the base layer"
    );
    assert!(result.tile_min.iter().all(|&r| r >= 0.25 - 1e-12));
}

#[test]
fn criterion_8_determinism_and_floor() {
    // Floors are asserted on every session in this suite (assert_floor);
    // here: bit-identical re-runs across the policy matrix.
    let world = trend_world(3, walk_profile(3));
    let perturb = Perturbations {
        bw_error: 0.3,
        fov_fidelity: 0.6,
    };
    for policy in Policy::ALL {
        let a = simulate_session(
            &world.config,
            &world.bw,
            &world.head,
            &world.crowd,
            policy,
            &perturb,
            11,
        )
        .unwrap();
        let b = simulate_session(
            &world.config,
            &world.bw,
            &world.head,
            &world.crowd,
            policy,
            &perturb,
            11,
        )
        .unwrap();
        assert!(
            a.deterministic_eq(&b),
            "{policy}: same-seed sessions diverged"
        );
        assert_floor(&a);
    }
    let sep = run_separation(Policy::Robust360);
    let sep2 = run_separation(Policy::Robust360);
    assert!(sep.deterministic_eq(&sep2));
    pass(
        "8 (determinism and base-layer floor)",
        "same-seed sessions bit-identical for all four policies; floor held across the matrix"
            .into(),
    );
}
