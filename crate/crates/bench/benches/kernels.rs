use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mshape_core::condexp::{solve_pde, working_grids};
use mshape_core::model::by_name;
use mshape_core::support::marginal_support;
use mshape_core::{generate_paths, Payoff, TimeGrid};

fn pde(c: &mut Criterion) {
    let mut group = c.benchmark_group("pde_solve");
    for process in ["bm", "boundedvol"] {
        let spec = by_name(process).unwrap();
        for n in [200usize, 400] {
            let (tg, xg) = working_grids(&spec, 1.0, n, n, 8.0).unwrap();
            group.bench_with_input(BenchmarkId::new(process, n), &n, |b, _| {
                b.iter(|| solve_pde(&spec, &Payoff::call(0.0), black_box(&tg), &xg).unwrap())
            });
        }
    }
    group.finish();
}

fn paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_paths");
    group.sample_size(10);
    let grid = TimeGrid::uniform(1.0, 200).unwrap();
    for process in ["bm", "boundedvol", "cpoisson", "jumpdiff"] {
        let spec = by_name(process).unwrap();
        group.bench_function(process, |b| b.iter(|| generate_paths(&spec, &grid, black_box(1000), 7).unwrap()));
    }
    group.finish();
}

fn support(c: &mut Criterion) {
    let grid = TimeGrid::uniform(1.0, 100).unwrap();
    let bundle = generate_paths(&by_name("bm").unwrap(), &grid, 10_000, 3).unwrap();
    c.bench_function("marginal_support/bm_10k", |b| b.iter(|| marginal_support(black_box(&bundle), 0.05, 5).unwrap()));
}

criterion_group!(benches, pde, paths, support);
criterion_main!(benches);
