use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tripodsim::model::{GridSpec, Scenario};
use tripodsim::par::Execution;
use tripodsim::propagator::{run_with, RunOptions};

fn scenario(n_xi: usize) -> Scenario {
    Scenario::reference_storage()
        .with_grid(GridSpec {
            n_xi,
            d_tau: 0.02,
            t_final: 260.0,
        })
        .with_delta(1.0)
        .unwrap()
}

fn marching(c: &mut Criterion) {
    let mut group = c.benchmark_group("storage_run");
    group.sample_size(10);
    for n_xi in [60, 240] {
        let s = scenario(n_xi);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let opts = RunOptions {
                execution: exec,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n_xi), &s, |b, s| {
                b.iter(|| run_with(s, opts, &|t| s.signal.evaluate(t)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, marching);
criterion_main!(benches);
