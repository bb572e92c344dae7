use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use zeropi::eigen::BandCholesky;
use zeropi::spectrum::flux_sweep;
use zeropi::{assemble, lowest_eigenpairs, CircuitParams, DisorderParams, GridQuality, SolverOptions, SweepSettings};
use zeropi_bench::{bench_grid, ridge_params};

fn assembly(c: &mut Criterion) {
    let p = ridge_params();
    let g = bench_grid();
    c.bench_function("assemble_301x60", |b| {
        b.iter(|| assemble(black_box(&p), &DisorderParams::NONE, &g).unwrap())
    });
}

fn factorization(c: &mut Criterion) {
    let h = assemble(&ridge_params(), &DisorderParams::NONE, &bench_grid()).unwrap();
    c.bench_function("band_cholesky_301x60", |b| {
        b.iter(|| BandCholesky::factor(black_box(&h), -1e-3).unwrap())
    });
}

fn eigenpairs(c: &mut Criterion) {
    let h = assemble(&ridge_params(), &DisorderParams::NONE, &bench_grid()).unwrap();
    let opts = SolverOptions::default();
    let mut group = c.benchmark_group("lowest_eigenpairs");
    group.sample_size(10);
    for k in [3usize, 6] {
        group.bench_function(format!("k{k}"), |b| {
            b.iter(|| lowest_eigenpairs(black_box(&h), k, &opts).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    // small circuit so the bench measures sweep overhead plus a few solves
    let p = CircuitParams::from_ratios(100.0, 150.0, 6.0, 0.0).unwrap();
    let settings = SweepSettings {
        quality: GridQuality::Coarse,
        refine: false,
        ..SweepSettings::default()
    };
    let flux = [0.0, 1.0, 2.0, 3.0];
    let mut group = c.benchmark_group("flux_sweep");
    group.sample_size(10);
    group.bench_function("coarse_4pts", |b| {
        b.iter(|| flux_sweep(black_box(&p), &DisorderParams::NONE, &flux, 3, &settings).unwrap())
    });
    group.finish();
}

criterion_group!(benches, assembly, factorization, eigenpairs, sweep);
criterion_main!(benches);
