use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncrh_bench::{local_system, mixed_sum, residue, verdier_local_system};
use ncrh_core::linalg::{exp_2pii, phi_matrix, principal_log_over_2pii};
use ncrh_core::{inverse_rh, jordan_holder, rh, FundamentalDomain, DEFAULT_TOL};
use std::hint::black_box;

fn matrix_functions(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix-functions");
    for n in [2, 4, 8, 16] {
        let theta = residue(n, 1);
        let mono = exp_2pii(&theta).unwrap();
        group.bench_with_input(BenchmarkId::new("phi", n), &theta, |b, m| {
            b.iter(|| phi_matrix(black_box(m)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("log", n), &mono, |b, m| {
            b.iter(|| principal_log_over_2pii(black_box(m), FundamentalDomain::default()).unwrap())
        });
    }
    group.finish();
}

fn functor(c: &mut Criterion) {
    let mut group = c.benchmark_group("rh");
    for r in [1, 2, 3] {
        let e = local_system(r, 3, 2);
        let v = verdier_local_system(r, 3, 2);
        group.bench_with_input(BenchmarkId::new("rh", r), &e, |b, e| {
            b.iter(|| rh(black_box(e), DEFAULT_TOL).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("inverse", r), &v, |b, v| {
            b.iter(|| inverse_rh(black_box(v), FundamentalDomain::default(), DEFAULT_TOL).unwrap())
        });
    }
    group.finish();
}

fn composition_series(c: &mut Criterion) {
    let mut group = c.benchmark_group("jordan-holder");
    group.sample_size(10);
    for r in [1, 2, 3] {
        let e = mixed_sum(r, 2);
        group.bench_with_input(BenchmarkId::new("mixed-sum", r), &e, |b, e| {
            b.iter(|| jordan_holder(black_box(e), 0, DEFAULT_TOL).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, matrix_functions, functor, composition_series);
criterion_main!(benches);
