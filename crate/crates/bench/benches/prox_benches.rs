//! Evaluation-cost benchmarks: exact prox per penalty, noisy approximate
//! operators, the Monte-Carlo softmin estimator, one splitting sweep, and
//! the contraction-factor surface.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use iprox::verify::contractivity_surface;
use iprox_bench::{catalog, cloud, fb_composite, noisy_operator, sampling_operator};

fn bench_exact_prox(c: &mut Criterion) {
    let points = cloud(10, 64);
    let mut group = c.benchmark_group("exact_prox_dim10");
    for (name, p) in catalog(10) {
        group.bench_function(name, |b| {
            b.iter(|| {
                for x in &points {
                    black_box(p.prox(1.0, black_box(x)).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_noisy_operator(c: &mut Criterion) {
    let points = cloud(10, 64);
    let mut group = c.benchmark_group("noisy_operator_dim10");
    for (name, p) in catalog(10) {
        let g = noisy_operator(&p, 0.1);
        group.bench_function(name, |b| {
            b.iter(|| {
                for x in &points {
                    black_box(g.evaluate(black_box(x)).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_sampling_estimator(c: &mut Criterion) {
    let mut group = c.benchmark_group("sampling_estimator_dim2");
    group.sample_size(10);
    for samples in [1_000usize, 10_000] {
        let p = catalog(2).remove(0).1;
        let g = sampling_operator(&p, samples);
        group.bench_with_input(BenchmarkId::from_parameter(samples), &samples, |b, _| {
            b.iter(|| black_box(g.evaluate(black_box(&[1.5, -0.5])).unwrap()))
        });
    }
    group.finish();
}

fn bench_splitting_sweep(c: &mut Criterion) {
    let op = fb_composite(10);
    c.bench_function("fb_100_iterations_dim10", |b| {
        b.iter(|| {
            let mut x = vec![3.0; 10];
            for _ in 0..100 {
                x = op.apply(black_box(&x)).unwrap();
            }
            black_box(x)
        })
    });
}

fn bench_surface(c: &mut Criterion) {
    let l_g: Vec<f64> = (1..=24).map(|i| 0.5 * i as f64).collect();
    let ratios: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
    c.bench_function("contraction_surface_24x40", |b| {
        b.iter(|| black_box(contractivity_surface(black_box(&l_g), black_box(&ratios))))
    });
}

criterion_group!(
    benches,
    bench_exact_prox,
    bench_noisy_operator,
    bench_sampling_estimator,
    bench_splitting_sweep,
    bench_surface
);
criterion_main!(benches);
