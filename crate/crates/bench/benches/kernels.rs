use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use degrd_bench::{disk, interval, smooth};
use degrd_core::fields::norms::{bc_norm, weighted_sobolev_norm};
use degrd_core::models::builtin_logistic;
use degrd_core::operators::assemble_as;
use degrd_core::solver::{step, SimulationState, SolverConfig};
use std::hint::black_box;

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for n in [128, 512] {
        let mesh = interval(1.5, n);
        let a = vec![1.0; mesh.n_cells()];
        group.bench_with_input(BenchmarkId::new("interval", n), &mesh, |b, m| {
            b.iter(|| assemble_as(black_box(&a), m).unwrap())
        });
    }
    for n in [32, 64] {
        let mesh = disk(1.5, n);
        let a = vec![1.0; mesh.n_cells()];
        group.bench_with_input(BenchmarkId::new("disk", n), &mesh, |b, m| {
            b.iter(|| assemble_as(black_box(&a), m).unwrap())
        });
    }
    group.finish();
}

fn stepping(c: &mut Criterion) {
    let model = builtin_logistic(1.0, 1.0, 1.0).unwrap();
    let config = SolverConfig::fixed(1.0, 0.01);
    let mut group = c.benchmark_group("step");
    for (name, mesh) in [("interval_512", interval(1.0, 512)), ("disk_32", disk(1.0, 32))] {
        let state = SimulationState::new(smooth(&mesh), &config);
        group.bench_function(name, |b| b.iter(|| step(black_box(&state), &model, &mesh, &config).unwrap()));
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let mut group = c.benchmark_group("norms");
    for (name, mesh) in [("interval_512", interval(2.0, 512)), ("disk_32", disk(2.0, 32))] {
        let u = smooth(&mesh);
        group.bench_function(format!("w2p/{name}"), |b| {
            b.iter(|| weighted_sobolev_norm(black_box(&u), &mesh, 2, 6.0).unwrap())
        });
        group.bench_function(format!("bc1/{name}"), |b| b.iter(|| bc_norm(black_box(&u), &mesh, 1).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, assembly, stepping, norms);
criterion_main!(benches);
