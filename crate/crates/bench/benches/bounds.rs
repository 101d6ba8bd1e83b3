use criterion::{criterion_group, criterion_main, Criterion};
use lgp_core::bounds::{grid, min_hitting_time, omega_bounds, rate_bounds, SpaceParams};
use lgp_core::oracle::{exact_bloating_factors, TinySpec};
use std::hint::black_box;

fn closed_form(c: &mut Criterion) {
    let p = SpaceParams::nguyen4();
    c.bench_function("rate_bounds_d5_m50_u9", |b| b.iter(|| rate_bounds(black_box(5), 50, 9, &p)));
    c.bench_function("hitting_time_d10_m100_u1", |b| {
        b.iter(|| min_hitting_time(black_box(10), 100, 1, &p, 1e-4, true))
    });
    c.bench_function("omega_bounds_exact_k8", |b| b.iter(|| omega_bounds(black_box(2), 10, &p).unwrap()));
    let us: Vec<usize> = (1..=5).collect();
    let ds: Vec<usize> = (1..=10).collect();
    let ms: Vec<usize> = (1..=100).step_by(10).collect();
    c.bench_function("grid_slice_500", |b| b.iter(|| grid(&p, &us, &ds, &ms, 1e-4)));
}

fn enumeration(c: &mut Criterion) {
    let space = TinySpec::new(2, 1, 2, 2, 4, 0).build().unwrap();
    let mut g = c.benchmark_group("tiny_space");
    g.sample_size(10);
    g.bench_function("bfs_distances", |b| b.iter(|| space.bfs_distances()));
    g.bench_function("exact_bloating_m1_1_m2_2", |b| b.iter(|| exact_bloating_factors(space.iset(), 1, 2).unwrap()));
    g.finish();
}

criterion_group!(benches, closed_form, enumeration);
criterion_main!(benches);
