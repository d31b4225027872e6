use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frontlab_core::drift::{blocking_criterion, DriftTerm, TRACE_CONSTANT};
use frontlab_core::parallel::{map_parallel, map_sequential};
use frontlab_core::{make_cubic, BlockingConstants};

/// A (K, eps) phase-diagram grid: every cell builds its drift tables and
/// evaluates the criterion.
fn sweep(c: &mut Criterion) {
    let nl = make_cubic(0.25).unwrap();
    let constants = BlockingConstants::compute(&nl).unwrap();
    let cells: Vec<(f64, f64)> = (0..8)
        .flat_map(|i| (0..8).map(move |j| (2.0 + 3.0 * i as f64, 10f64.powf(-4.0 + 0.5 * j as f64))))
        .collect();
    let job = |&(k, eps): &(f64, f64)| {
        let d = DriftTerm::mollified_indicator(k, eps, eps / 100.0).unwrap();
        blocking_criterion(&constants, &d, TRACE_CONSTANT).rhs
    };
    let mut group = c.benchmark_group("criterion_grid");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("sequential", cells.len()), &cells, |b, cells| {
        b.iter(|| map_sequential(cells, job))
    });
    group.bench_with_input(BenchmarkId::new("parallel", cells.len()), &cells, |b, cells| {
        b.iter(|| map_parallel(cells, job))
    });
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
