use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use offdiag_holonomy::exec::ExecMode;
use offdiag_holonomy::holonomy::{
    build_sigma_table_with, transport_matrices, KernelRoute, TableOptions, TransportOptions,
    TransportScheme,
};
use offdiag_holonomy::models::{TripodPath, UnitaryPathGenerator};
use offdiag_holonomy::random::seeded;
use offdiag_holonomy::CurveFamily;

const MODES: [(&str, ExecMode); 2] = [
    ("sequential", ExecMode::Sequential),
    ("parallel", ExecMode::Parallel),
];

fn curve_generation(c: &mut Criterion) {
    let g = Arc::new(UnitaryPathGenerator::random_open(&mut seeded(1), &[2, 2, 2], 1.0).unwrap());
    let mut group = c.benchmark_group("curve_generation");
    for m in [400usize, 1600] {
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, m), &m, |b, &m| {
                b.iter(|| CurveFamily::from_generator_with(g.clone(), black_box(m), mode).unwrap())
            });
        }
    }
    group.finish();
}

fn transport(c: &mut Criterion) {
    let curve = TripodPath::random_fourier(&mut seeded(2), 3).curve(1600).unwrap();
    let mut group = c.benchmark_group("transport_matrices");
    for scheme in [TransportScheme::Magnus, TransportScheme::Overlap] {
        for (name, mode) in MODES {
            let opts = TransportOptions { scheme, mode, ..Default::default() };
            group.bench_function(BenchmarkId::new(name, format!("{scheme:?}")), |b| {
                b.iter(|| transport_matrices(black_box(&curve), opts).unwrap())
            });
        }
    }
    group.finish();
}

fn sigma_table(c: &mut Criterion) {
    let g = UnitaryPathGenerator::random_open(&mut seeded(3), &[1, 2, 2, 1], 1.0).unwrap();
    let curve = CurveFamily::from_generator(Arc::new(g), 800).unwrap();
    let mut group = c.benchmark_group("build_sigma_table");
    for route in [KernelRoute::Transport, KernelRoute::ProjectorProduct] {
        for (name, mode) in MODES {
            let opts = TableOptions {
                route,
                transport: TransportOptions { mode, ..Default::default() },
                // the projector product is not unitary at finite M
                check_unitarity: route == KernelRoute::Transport,
            };
            group.bench_function(BenchmarkId::new(name, format!("{route:?}")), |b| {
                b.iter(|| build_sigma_table_with(black_box(&curve), opts).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, curve_generation, transport, sigma_table);
criterion_main!(benches);
