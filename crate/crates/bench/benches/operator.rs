use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hammerstein_bench::{example, grid, newton_start, operator, SIZES};
use hammerstein_core::DiscreteOperator;
use std::hint::black_box;

fn build(c: &mut Criterion) {
    let sys = example();
    let mut g = c.benchmark_group("operator/build");
    for n in SIZES {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| DiscreteOperator::new(black_box(&sys), grid(n)).unwrap())
        });
    }
    g.finish();
}

fn apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator/apply");
    for n in SIZES {
        let op = operator(n);
        let u = newton_start(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| op.apply(black_box(&u)).unwrap())
        });
    }
    g.finish();
}

fn jacobian(c: &mut Criterion) {
    let mut g = c.benchmark_group("operator/jacobian");
    for n in SIZES {
        let op = operator(n);
        let u = newton_start(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| op.jacobian(black_box(&u)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, build, apply, jacobian);
criterion_main!(benches);
