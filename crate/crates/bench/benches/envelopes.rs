use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use proxhull::applications::{denoise, salt_pepper, synthetic_image, NoiseSpec};
use proxhull::convex_baseline::{local_lower_transform_convex, BaselineParams};
use proxhull::moreau::{moreau_lower_iterative, sweep_step};
use proxhull::transforms::local_lower_transform;
use proxhull::{EnvelopeParams, StopRule};
use proxhull_bench::{double_well_1d, noise_2d, radial_2d};

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep_step");
    for n in [64, 256, 512] {
        let f = noise_2d(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| sweep_step(black_box(f), 3, 1.0).unwrap())
        });
    }
    g.finish();

    let f = noise_2d(128);
    let p = EnvelopeParams::new(1.0).with_stop(StopRule::ExactBound);
    c.bench_function("moreau_lower exact 128^2", |b| {
        b.iter(|| moreau_lower_iterative(black_box(&f), &p).unwrap())
    });
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("local_lower_transform");
    g.sample_size(10);
    let p = EnvelopeParams::new(2.0);
    for h in [0.01, 0.001] {
        let f = double_well_1d(h);
        g.bench_with_input(BenchmarkId::new("double_well", h), &f, |b, f| {
            b.iter(|| local_lower_transform(black_box(f), &p).unwrap())
        });
    }
    let p = EnvelopeParams::new(1.0);
    for h in [0.05, 0.02] {
        let f = radial_2d(h);
        g.bench_with_input(BenchmarkId::new("radial", h), &f, |b, f| {
            b.iter(|| local_lower_transform(black_box(f), &p).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("convex_baseline");
    g.sample_size(10);
    let f = double_well_1d(0.1);
    g.bench_function("double_well 0.1", |b| {
        b.iter(|| local_lower_transform_convex(black_box(&f), 1.0, &BaselineParams::default()).unwrap())
    });
    g.finish();
}

fn restoration(c: &mut Criterion) {
    let clean = synthetic_image(128).unwrap();
    let (noisy, known) = salt_pepper(&clean, &NoiseSpec::new(0.7, 1)).unwrap();
    let p = EnvelopeParams::new(15.0);
    let mut g = c.benchmark_group("restoration");
    g.sample_size(10);
    g.bench_function("denoise 128^2 70%", |b| {
        b.iter(|| denoise(black_box(&noisy), &known, 15.0, None, &p).unwrap())
    });
    g.finish();
}

criterion_group!(benches, sweeps, transforms, restoration);
criterion_main!(benches);
