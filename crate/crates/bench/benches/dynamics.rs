use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use cheshire_bench::spin_orbit_fixture;
use cheshire_core::dynamics::{evolve_dyson2, evolve_exact, evolve_exact_dense, DysonTerms};
use cheshire_core::hilbert::{dft_q_to_p, mat_exp};
use cheshire_core::meter::make_meter;
use cheshire_core::{c64, Operator, SpaceSignature};

fn evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    for n in [16usize, 64, 256] {
        let (spec, pre, meter) = spin_orbit_fixture(n, 4.0_f64.min(n as f64 / 5.0));
        group.bench_with_input(BenchmarkId::new("exact_blocks", n), &n, |b, _| {
            b.iter(|| evolve_exact(black_box(&spec), black_box(&pre), &meter).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("dyson2", n), &n, |b, _| {
            b.iter(|| evolve_dyson2(black_box(&spec), black_box(&pre), &meter, DysonTerms::Published).unwrap())
        });
    }
    let (spec, pre, meter) = spin_orbit_fixture(8, 1.5);
    group.bench_function("exact_dense/8", |b| {
        b.iter(|| evolve_exact_dense(black_box(&spec), black_box(&pre), &meter).unwrap())
    });
    group.finish();
}

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("dft_q_to_p");
    for n in [64usize, 512] {
        let amps = make_meter(n, n as f64 / 8.0).unwrap().amplitudes().to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(2 * n + 1), &amps, |b, a| {
            b.iter(|| dft_q_to_p(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn exponential(c: &mut Criterion) {
    let mut group = c.benchmark_group("mat_exp");
    for dim in [8usize, 64] {
        let diag: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut h = Operator::diagonal(SpaceSignature::single("s", dim), &diag).unwrap();
        let hop = Operator::from_rows(
            SpaceSignature::single("s", dim),
            &(0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| {
                            if i.abs_diff(j) == 1 {
                                c64(0.5, 0.0)
                            } else {
                                c64(0.0, 0.0)
                            }
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
                .iter()
                .map(|r| r.as_slice())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        h = h.add(&hop).unwrap();
        group.bench_with_input(BenchmarkId::new("hermitian", dim), &h, |b, h| {
            b.iter(|| mat_exp(black_box(h), c64(0.0, -1.3)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, evolution, transform, exponential);
criterion_main!(benches);
