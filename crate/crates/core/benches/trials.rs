use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use viewsync_core::harness::run_scenario;
use viewsync_core::metrics::sample_consecutive;
use viewsync_core::*;

fn configs() -> Vec<ScenarioConfig> {
    (0..16)
        .map(|seed| ScenarioConfig {
            seed,
            delay_mode: DelayMode::UniformRandom,
            adversary: "crash:leader@0".parse().unwrap(),
            ..ScenarioConfig::new(SyncKind::Cogsworth, 10, 3)
        })
        .collect()
}

fn scenario_batch(c: &mut Criterion) {
    let batch = configs();
    let mut group = c.benchmark_group("scenario_batch");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("parallel", batch.len()), |b| {
        b.iter(|| par::map(&batch, |cfg| run_scenario(cfg).unwrap().communication))
    });
    group.bench_function(BenchmarkId::new("sequential", batch.len()), |b| {
        b.iter(|| par::map_sequential(&batch, |cfg| run_scenario(cfg).unwrap().communication))
    });
    group.finish();
}

fn expected_x(c: &mut Criterion) {
    let trials: Vec<u64> = (0..10_000).collect();
    let sample = |&i: &u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        rng.set_stream(i);
        sample_consecutive(100, 33, &mut rng).until_honest
    };
    let mut group = c.benchmark_group("expected_x");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| par::map(&trials, sample).iter().sum::<u64>()));
    group.bench_function("sequential", |b| b.iter(|| par::map_sequential(&trials, sample).iter().sum::<u64>()));
    group.finish();
}

criterion_group!(benches, scenario_batch, expected_x);
criterion_main!(benches);
