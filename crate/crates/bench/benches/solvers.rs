use condport_bench::{instance, kappa};
use condport_core::oracle::{worst_case_bruteforce, GridSpec};
use condport_core::{rho_min, solve_allocation, LossSpec, SolveOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn knapsack(c: &mut Criterion) {
    let mut g = c.benchmark_group("rho_min");
    for n in [100, 10_000] {
        let k = kappa(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &k, |b, k| b.iter(|| rho_min(black_box(k), 0.3).unwrap()));
    }
    g.finish();
}

fn allocations(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut g = c.benchmark_group("solve_allocation");
    g.sample_size(10);
    let cases = [
        ("singleton_mv", 0.0, LossSpec::mean_variance(1.0).unwrap()),
        ("singleton_cvar", 0.0, LossSpec::mean_cvar(1.0, 0.05).unwrap()),
        ("fiber_mv", 0.05, LossSpec::mean_variance(1.0).unwrap()),
        ("fiber_cvar", 0.05, LossSpec::mean_cvar(1.0, 0.05).unwrap()),
    ];
    for (name, gamma, loss) in cases {
        let spec = instance(30, 5, gamma, 0.3, loss, 2);
        g.bench_function(name, |b| b.iter(|| solve_allocation(black_box(&spec), &opts).unwrap()));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let spec = instance(3, 1, 0.05, 0.5, LossSpec::mean_variance(0.5).unwrap(), 3);
    let grid = GridSpec::uniform(1, -1.0, 1.0, 31).unwrap();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    g.bench_function("bruteforce_n3_grid31", |b| {
        b.iter(|| worst_case_bruteforce(&[1.0], 0.0, black_box(&spec), &grid).unwrap())
    });
    g.finish();
}

criterion_group!(benches, knapsack, allocations, oracle);
criterion_main!(benches);
