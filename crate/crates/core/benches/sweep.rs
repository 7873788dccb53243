use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use natom::sweep::{run_sequential, Axis, SweepSpec};

fn grid(n_omega: usize, n_delta: usize) -> SweepSpec {
    SweepSpec {
        omega_axis: Axis::linspace(2.0, 10.0, n_omega).unwrap(),
        delta_axis: Axis::linspace(-2.0, 2.0, n_delta).unwrap(),
    }
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (n_omega, n_delta) in [(5, 5), (9, 9)] {
        let spec = grid(n_omega, n_delta);
        let cells = n_omega * n_delta;
        group.bench_with_input(
            BenchmarkId::new("sequential", cells),
            &spec,
            |b, spec| b.iter(|| run_sequential(spec)),
        );
        #[cfg(feature = "parallel")]
        group.bench_with_input(
            BenchmarkId::new("parallel", cells),
            &spec,
            |b, spec| b.iter(|| natom::sweep::run_parallel(spec)),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
