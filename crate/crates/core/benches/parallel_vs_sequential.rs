//! Parallel against sequential execution of the same kernels in one binary.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wwlab::dn::{DnConfig, StripSolver};
use wwlab::numerics::Grid1D;
use wwlab::par;

fn dense_dn(c: &mut Criterion) {
    let mut group = c.benchmark_group("dense_dn_matrix");
    group.sample_size(10);
    for n in [64usize, 128] {
        let g = Grid1D::new(40.0, n).unwrap();
        let eta: Vec<f64> = g.nodes().iter().map(|x| 0.05 / (x / 2.0).cosh().powi(2)).collect();
        let solver = StripSolver::new(&g, 1.0, 0.0, DnConfig::default()).unwrap();
        let p = solver.problem(&eta).unwrap();
        for (label, sequential) in [("parallel", false), ("sequential", true)] {
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                par::force_sequential(sequential);
                b.iter(|| p.dense().unwrap());
                par::force_sequential(false);
            });
        }
    }
    group.finish();
}

fn columns(c: &mut Criterion) {
    // Independent DN solves, the shape of most parallel loops in the library.
    let g = Grid1D::new(40.0, 128).unwrap();
    let solver = StripSolver::new(&g, 1.0, 0.0, DnConfig::default()).unwrap();
    let surfaces: Vec<Vec<f64>> = (0..16).map(|k| g.nodes().iter().map(|x| 0.01 * k as f64 * (x / 4.0).cos()).collect()).collect();
    let psi: Vec<f64> = g.nodes().iter().map(|x| (x / 3.0).sin()).collect();
    let mut group = c.benchmark_group("independent_solves");
    group.sample_size(10);
    for (label, sequential) in [("parallel", false), ("sequential", true)] {
        group.bench_function(label, |b| {
            par::force_sequential(sequential);
            b.iter(|| par::map_slice(&surfaces, |eta| solver.problem(eta).unwrap().apply(&psi).unwrap()));
            par::force_sequential(false);
        });
    }
    group.finish();
}

criterion_group!(benches, dense_dn, columns);
criterion_main!(benches);
