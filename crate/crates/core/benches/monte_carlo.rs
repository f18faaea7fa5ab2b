use criterion::{criterion_group, criterion_main, Criterion};

use beampath::parallel::Execution;
use beampath::simulation::{run_monte_carlo, ExperimentConfig};
use beampath::Scenario;

fn config(execution: Execution) -> ExperimentConfig {
    ExperimentConfig {
        scenarios: vec![Scenario::A, Scenario::B],
        node_counts: vec![8, 10],
        runs: 6,
        execution,
        ..Default::default()
    }
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let cfg = config(exec);
        group.bench_function(name, |b| b.iter(|| run_monte_carlo(&cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, monte_carlo);
criterion_main!(benches);
