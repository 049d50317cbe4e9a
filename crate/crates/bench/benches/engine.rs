use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use xtalk_core::budget::{simulate_gate_error, ErrorScalingConfig};
use xtalk_core::lab::{ramsey_fringe, RamseyConfig};
use xtalk_core::quantum::{
    evolve, tensor, Observable, OperatorMatrix, StateVector, TimeDependentHamiltonian,
};
use xtalk_core::CouplerModel;

fn two_level(c: &mut Criterion) {
    let mut h = TimeDependentHamiltonian::new(2);
    h.add_static(OperatorMatrix::sigma_z().scale_real(0.3))
        .unwrap();
    h.add_term(OperatorMatrix::sigma_x(), |t| 0.1 * (PI * t / 20.0).sin())
        .unwrap();
    let psi = StateVector::ground(2).unwrap();
    let grid = [0.0, 20.0];
    let obs = [Observable::new("p1", OperatorMatrix::excited_projector())];
    c.bench_function("evolve_2x2_20ns", |b| {
        b.iter(|| evolve(black_box(&h), &psi, &grid, 0.125, &obs).unwrap())
    });
}

fn four_level(c: &mut Criterion) {
    let id = OperatorMatrix::identity(2);
    let mut h = TimeDependentHamiltonian::new(4);
    h.add_static(tensor(&OperatorMatrix::sigma_z(), &id).scale_real(0.2))
        .unwrap();
    let exchange = tensor(
        &OperatorMatrix::sigma_plus(),
        &OperatorMatrix::sigma_minus(),
    );
    h.add_hermitian_pair(exchange, |t| Complex64::from_polar(0.05, 0.7 * t))
        .unwrap();
    let psi = StateVector::basis(4, 1).unwrap();
    let grid: Vec<f64> = (0..=100).map(|k| k as f64).collect();
    c.bench_function("evolve_4x4_100ns", |b| {
        b.iter(|| evolve(black_box(&h), &psi, &grid, 0.01, &[]).unwrap())
    });
}

fn gate_error(c: &mut Criterion) {
    let cfg = ErrorScalingConfig {
        n: 9,
        ..ErrorScalingConfig::default()
    };
    c.bench_function("gate_error_n9", |b| {
        b.iter(|| simulate_gate_error(black_box(&cfg)).unwrap())
    });
}

fn ramsey(c: &mut Criterion) {
    let model = CouplerModel::default();
    let cfg = RamseyConfig {
        idle_times_ns: (0..=40).map(|k| 5.0 * k as f64).collect(),
        ..RamseyConfig::default()
    };
    let mut group = c.benchmark_group("ramsey");
    group.sample_size(10);
    group.bench_function("fringe_41_points", |b| {
        b.iter(|| ramsey_fringe(black_box(4.2), &model, &[(0.01, 0.0)], &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, two_level, four_level, gate_error, ramsey);
criterion_main!(benches);
