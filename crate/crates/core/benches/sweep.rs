use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fhegen::emulator::{ContextConfig, Method};
use fhegen::exec::Execution;
use fhegen::sweep::{self, AppKind, BenchPlan};
use fhegen::workloads::WorkloadKind;

fn workloads(c: &mut Criterion) {
    let cfg = ContextConfig::default();
    let specs = BenchPlan {
        workloads: WorkloadKind::ALL.to_vec(),
        methods: Method::ALL.to_vec(),
        bits: vec![6, 8, 12, 16],
        slots: 64,
        seed: 0,
        repeat: 1,
    }
    .expand();
    let mut g = c.benchmark_group("workload-sweep");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| sweep::run_workloads(&specs, &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn floyd(c: &mut Criterion) {
    let cfg = ContextConfig::default();
    let specs = sweep::expand_apps(AppKind::Floyd, &Method::ALL, &[8], &[8, 16], 0, 2);
    let mut g = c.benchmark_group("floyd-sweep");
    g.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| sweep::run_apps(&specs, &cfg, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, workloads, floyd);
criterion_main!(benches);
