use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use schur_cue::montecarlo::{mc_free_energy, RunConfig};
use schur_cue::par::Execution;

fn replicates(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_free_energy");
    group.sample_size(10);
    for n in [16usize, 64, 128] {
        let cfg = RunConfig::fixed_q(1, 64, n, 0.5).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let cfg = cfg.clone().with_execution(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &cfg, |b, cfg| {
                b.iter(|| mc_free_energy(cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, replicates);
criterion_main!(benches);
