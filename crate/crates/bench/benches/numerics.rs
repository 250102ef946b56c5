use criterion::{criterion_group, criterion_main, Criterion};
use greedybins_bench::loaded_state;
use greedybins_core::bounds::{binomial_upper_tail, subset_tail_bound};
use greedybins_core::fluid::integrate;
use greedybins_core::rankstats::{equal_pair_stats, LoadProfile};

fn fluid(c: &mut Criterion) {
    c.bench_function("fluid_d2_c1_h1e-3", |b| {
        b.iter(|| integrate(2, Some(30), 1.0, 1e-3).unwrap())
    });
    c.bench_function("fluid_d3_c4_auto", |b| {
        b.iter(|| integrate(3, None, 4.0, 1e-3).unwrap())
    });
}

fn tails(c: &mut Criterion) {
    c.bench_function("binomial_tail_m1e6", |b| {
        b.iter(|| binomial_upper_tail(1_000_000, 0.25, 260_000))
    });
    c.bench_function("subset_tail_m1e3", |b| {
        b.iter(|| subset_tail_bound(0.5, 2, 1000, 300).unwrap())
    });
}

fn rank_stats(c: &mut Criterion) {
    let state = loaded_state(100_000, 1, 2, 1);
    c.bench_function("load_profile_1e5", |b| b.iter(|| LoadProfile::new(&state)));
    c.bench_function("equal_pairs_1e5", |b| {
        b.iter(|| equal_pair_stats(&state, 0.1).unwrap())
    });
}

criterion_group!(benches, fluid, tails, rank_stats);
criterion_main!(benches);
