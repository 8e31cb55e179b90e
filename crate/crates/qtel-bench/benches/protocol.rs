use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qtel_core::{
    maximally_entangled_resource, random_state, run_protocol, schmidt, synthesize, PhaseTensor,
    RunMode,
};

fn bench_synthesize(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize");
    for n in [2usize, 4, 8] {
        let resource = maximally_entangled_resource(n).unwrap();
        let phases = PhaseTensor::fourier(n, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| synthesize(black_box(&resource), n, black_box(&phases)).unwrap())
        });
    }
    group.finish();
}

fn bench_exhaustive_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive_run");
    for n in [2usize, 4, 8] {
        let resource = maximally_entangled_resource(n).unwrap();
        let phases = PhaseTensor::fourier(n, n).unwrap();
        let psi = random_state(n, 7).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                run_protocol(
                    black_box(&psi),
                    black_box(&resource),
                    black_box(&phases),
                    RunMode::Exhaustive,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_schmidt(c: &mut Criterion) {
    let mut group = c.benchmark_group("schmidt");
    for n in [4usize, 8, 16] {
        let resource = maximally_entangled_resource(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| schmidt(black_box(resource.matrix())).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_synthesize, bench_exhaustive_run, bench_schmidt);
criterion_main!(benches);
