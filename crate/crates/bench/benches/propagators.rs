use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use spinphase::faraday::{sweep, ProbeSpec, SweepSource};
use spinphase::geophase::{berry_loop, Branch};
use spinphase::pulse::parametric_propagator;
use spinphase::ProbeGeometry;
use spinphase_bench::{aa_composite, aa_traced, cone_loop, G};

fn composite_protocol(c: &mut Criterion) {
    c.bench_function("aa_composite", |b| b.iter(|| aa_composite(black_box(0.7)).unwrap()));
}

fn traced_protocol(c: &mut Criterion) {
    let mut group = c.benchmark_group("aa_traced");
    for steps in [256usize, 2048] {
        group.bench_with_input(BenchmarkId::from_parameter(steps), &steps, |b, &s| {
            b.iter(|| aa_traced(black_box(0.7), s).unwrap())
        });
    }
    group.finish();
}

fn berry(c: &mut Criterion) {
    let lp = cone_loop(16384).unwrap();
    c.bench_function("cone_propagator_16384", |b| b.iter(|| parametric_propagator(black_box(&lp), 2.0)));
    c.bench_function("berry_loop_16384", |b| b.iter(|| berry_loop(black_box(&lp), 2.0, Branch::Plus).unwrap()));
}

fn field_ratio_sweep(c: &mut Criterion) {
    let ratios: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    let source = SweepSource::FieldRatio { ratios, g_factor: G };
    let fixed = ProbeSpec::Fixed(ProbeGeometry::new(0.3, 1.0).unwrap());
    c.bench_function("field_ratio_sweep_50", |b| b.iter(|| sweep(0.0, 1.0, black_box(&source), &fixed).unwrap()));
}

criterion_group!(benches, composite_protocol, traced_protocol, berry, field_ratio_sweep);
criterion_main!(benches);
