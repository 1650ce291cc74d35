use christoffel_core::synth::generate_example1_with;
use christoffel_core::{ChristoffelModel, CoefficientVector, Execution, FitOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn fit(c: &mut Criterion) {
    let ex = generate_example1_with(5000, 1, Execution::Parallel).unwrap();
    let mut group = c.benchmark_group("fit_d4_n4_N5000");
    for (name, exec) in MODES {
        let opts = FitOptions::with_epsilon(0.0).execution(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| ChristoffelModel::fit(&ex.dataset, 4, 4, &opts).unwrap())
        });
    }
    group.finish();
}

fn score(c: &mut Criterion) {
    let ex = generate_example1_with(2000, 2, Execution::Parallel).unwrap();
    let model = ChristoffelModel::fit(&ex.dataset, 4, 4, &FitOptions::default()).unwrap();
    let probes: Vec<CoefficientVector> = ex.dataset.coefficients().cloned().collect();
    let mut group = c.benchmark_group("cd_values_2000");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| model.cd_values(&probes, exec).unwrap()));
    }
    group.finish();
}

fn synth(c: &mut Criterion) {
    let mut group = c.benchmark_group("synth_example1_10000");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_example1_with(10_000, 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, fit, score, synth);
criterion_main!(benches);
