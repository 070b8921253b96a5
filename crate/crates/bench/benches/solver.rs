use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use sigpde_bench::brownian_paths;
use sigpde_core::{gram, KernelConfig, Scheme, Solver, StaticKernel, Strategy};

fn refinement(c: &mut Criterion) {
    let paths = brownian_paths(1, 2, 64, 3);
    let grid = KernelConfig::new(StaticKernel::Linear, 0, Scheme::Explicit)
        .grid(&paths[0], &paths[1])
        .unwrap();
    let mut group = c.benchmark_group("solve_final");
    for lambda in [0u32, 2, 4] {
        let cells = (grid.rows() * grid.cols()) as u64 * 4u64.pow(lambda);
        group.throughput(Throughput::Elements(cells));
        for (name, strategy) in [("sequential", Strategy::Sequential), ("wavefront", Strategy::Wavefront)] {
            let solver = Solver::new(Scheme::Explicit, lambda).with_strategy(strategy);
            group.bench_with_input(BenchmarkId::new(name, lambda), &grid, |b, g| {
                b.iter(|| solver.solve_final(black_box(g)).unwrap())
            });
        }
    }
    group.finish();
}

fn schemes(c: &mut Criterion) {
    let paths = brownian_paths(2, 2, 32, 2);
    let grid = KernelConfig::new(StaticKernel::Linear, 0, Scheme::Explicit)
        .grid(&paths[0], &paths[1])
        .unwrap();
    let mut group = c.benchmark_group("scheme");
    for scheme in [Scheme::Explicit, Scheme::Implicit] {
        let solver = Solver::new(scheme, 3).with_strategy(Strategy::Sequential);
        group.bench_function(scheme.to_string(), |b| {
            b.iter(|| solver.solve_final(black_box(&grid)).unwrap())
        });
    }
    group.finish();
}

fn gram_matrix(c: &mut Criterion) {
    let paths = brownian_paths(3, 20, 32, 2);
    let mut group = c.benchmark_group("gram_20");
    group.sample_size(10);
    for sk in [StaticKernel::Linear, StaticKernel::Rbf { sigma: 1.0 }] {
        let cfg = KernelConfig::new(sk, 2, Scheme::Explicit);
        group.bench_function(sk.to_string(), |b| {
            b.iter(|| gram(black_box(&paths), None, &cfg, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, refinement, schemes, gram_matrix);
criterion_main!(benches);
