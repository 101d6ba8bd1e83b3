use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use lgp_core::evolution::{init_population, random_program};
use lgp_core::program::ColumnExecutor;
use lgp_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn execution(c: &mut Criterion) {
    let (train, _) = Benchmark::Nguyen4.train_test(0).unwrap();
    let iset = InstructionSet::standard(&RegisterConfig::with_features(1));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = random_program(50, 100, &iset, &mut rng);
    let s0 = init_registers(iset.config(), &train.features).unwrap();
    let exons = p.without_introns(iset.config());
    let mut exec = ColumnExecutor::new(iset.config(), &train.features).unwrap();

    let mut g = c.benchmark_group("execute_50");
    g.bench_function("row_major", |b| b.iter(|| execute(black_box(&p), &s0)));
    g.bench_function("column_exons", |b| b.iter(|| exec.run(black_box(exons.instructions()), 0).len()));
    g.bench_function("intron_detection", |b| b.iter(|| detect_introns(black_box(p.instructions()), iset.config())));
    g.finish();
}

fn evolution(c: &mut Criterion) {
    let (train, _) = Benchmark::Nguyen4.train_test(0).unwrap();
    let iset = InstructionSet::standard(&RegisterConfig::with_features(1));
    let cfg = EvolutionConfig { generations: 1, ..Default::default() };
    c.bench_function("evolve_one_generation", |b| b.iter(|| evolve(black_box(&cfg), &iset, &train).unwrap()));

    let mut fit = Fitness::new(&train, iset.config()).unwrap();
    c.bench_function("evaluate_population", |b| {
        b.iter_batched(
            || init_population(&cfg, &iset, &mut ChaCha8Rng::seed_from_u64(2)),
            |pop| pop.iter().map(|p| fit.rse(p)).sum::<f64>(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, execution, evolution);
criterion_main!(benches);
