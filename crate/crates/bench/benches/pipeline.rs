//! Decision-pipeline benchmarks: window solve time as the lookahead grows
//! (the per-chunk budget of the online controller), quantization, and
//! coverage-set construction.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use robust360_core::fov::{alpha_set, FovSet};
use robust360_core::model::{RateLadder, UtilitySpec};
use robust360_core::quantize::robust_quantize;
use robust360_core::relax::{solve_relaxed, RelaxedInstance};

fn window_instance(window: usize) -> RelaxedInstance {
    RelaxedInstance {
        first_chunk: 10,
        alpha_card: vec![20; window],
        n_tiles: 32,
        bandwidth: vec![12.5; window],
        rate_min: 0.25,
        rate_max: 1.0,
        lambda: 100.0,
        eta: 1.0,
        utility: UtilitySpec::Linear,
        chunk_duration: 2.0,
        start_time: 21.0,
        prev_play: Some(20.5),
        prev_gamma: Some(0.5),
        buffer_chunks: 120,
        t_ini: 1.0,
        stall_deadline: 2.0 * (window as f64 + 9.0) + 20.8,
        prior_plays: vec![],
        utility_segments: 1,
    }
}

fn bench_window_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("window_solve");
    for window in [1usize, 2, 5, 10] {
        let instance = window_instance(window);
        group.bench_with_input(BenchmarkId::from_parameter(window), &instance, |b, inst| {
            b.iter(|| solve_relaxed(black_box(inst)).unwrap());
        });
    }
    group.finish();
}

fn bench_quantize(c: &mut Criterion) {
    let ladder = RateLadder::new(vec![0.25, 0.5, 0.75, 1.0]).unwrap();
    let gamma: Vec<f64> = (0..120)
        .map(|i| 0.25 + 0.75 * (i % 17) as f64 / 16.0)
        .collect();
    c.bench_function("quantize_120_chunks", |b| {
        b.iter(|| robust_quantize(black_box(&gamma), &ladder).unwrap());
    });
}

fn bench_alpha_set(c: &mut Criterion) {
    // A 12-sample distribution over a 32-tile grid.
    let dist: Vec<(FovSet, f64)> = (0..12)
        .map(|i| {
            let start = (i * 3) % 20;
            (FovSet::from_iter(start..start + 12), 1.0 / 12.0)
        })
        .collect();
    c.bench_function("alpha_set_greedy", |b| {
        b.iter(|| alpha_set(black_box(&dist), 0.95).unwrap());
    });
}

criterion_group!(benches, bench_window_solve, bench_quantize, bench_alpha_set);
criterion_main!(benches);
