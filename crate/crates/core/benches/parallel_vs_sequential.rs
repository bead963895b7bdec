use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dualap::analysis::inequality_checks;
use dualap::curvature::edge_curvatures;
use dualap::laplacian::{associated_weights, tet_dual_weights, tri_cotan_weights};
use dualap::mesh::{cube_tets, icosphere};
use dualap::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn weights(c: &mut Criterion) {
    let sphere = icosphere(5).unwrap();
    let cube = cube_tets(8).unwrap();
    let mut g = c.benchmark_group("weights");
    for (name, exec) in MODES {
        g.bench_with_input(
            BenchmarkId::new("tri-cotan/icosphere5", name),
            &exec,
            |b, &e| b.iter(|| tri_cotan_weights(black_box(&sphere), e).unwrap()),
        );
        g.bench_with_input(
            BenchmarkId::new("assoc-3/icosphere5", name),
            &exec,
            |b, &e| b.iter(|| associated_weights(black_box(&sphere), 3, e).unwrap()),
        );
        g.bench_with_input(BenchmarkId::new("tet-dual/cube8", name), &exec, |b, &e| {
            b.iter(|| tet_dual_weights(black_box(&cube), e).unwrap())
        });
    }
    g.finish();
}

fn curvature(c: &mut Criterion) {
    let sphere = icosphere(5).unwrap();
    let mut g = c.benchmark_group("edge-curvatures");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("icosphere5", name), &exec, |b, &e| {
            b.iter(|| edge_curvatures(black_box(&sphere), &[2, 3, 5], e).unwrap())
        });
    }
    g.finish();
}

fn inequalities(c: &mut Criterion) {
    let mut g = c.benchmark_group("inequalities");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("200k-samples", name), &exec, |b, &e| {
            b.iter(|| inequality_checks(black_box(200_000), 1, e).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, weights, curvature, inequalities);
criterion_main!(benches);
