use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qrough::linalg::{eig_hermitian, sqrt_psd};
use qrough::measures::{concurrence, concurrence_sqrt_route};
use qrough::phasespace::{roughness_sq_numeric, PhaseSpaceGrid};
use qrough::states::{ginibre_random, haar_random_pure};
use qrough::appendix::build_lambda_exact;
use qrough::{MeasureTuple, SingleQubitState};

fn kernels(c: &mut Criterion) {
    let mixed = ginibre_random(3, 42).unwrap();
    let pure = haar_random_pure(42);

    c.bench_function("eig_hermitian_4x4", |b| b.iter(|| eig_hermitian(black_box(mixed.rho())).unwrap()));
    c.bench_function("sqrt_psd_4x4", |b| b.iter(|| sqrt_psd(black_box(mixed.rho())).unwrap()));
    c.bench_function("concurrence_svd", |b| b.iter(|| concurrence(black_box(&mixed)).unwrap()));
    c.bench_function("concurrence_sqrt", |b| b.iter(|| concurrence_sqrt_route(black_box(&mixed)).unwrap()));
    c.bench_function("measure_tuple_pure", |b| b.iter(|| MeasureTuple::of(black_box(&pure)).unwrap()));
    c.bench_function("build_lambda", |b| b.iter(|| build_lambda_exact().unwrap()));

    let qubit = SingleQubitState::plus();
    let grid = PhaseSpaceGrid::new(7.0, 128).unwrap();
    c.bench_function("roughness_numeric_128", |b| b.iter(|| roughness_sq_numeric(black_box(&qubit), &grid).unwrap()));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
