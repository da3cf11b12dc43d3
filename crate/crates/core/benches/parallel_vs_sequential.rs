//! Data-parallel kernels on the default pool versus a one-thread pool.
//! Build with `--no-default-features` to time the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wdmd::beamfem::{assemble, generate_dataset, BeamSpec, Phase};
use wdmd::lifting::lift_with;
use wdmd::lti::frf_continuous;
use wdmd::{FilterBank, FitConfig, PreparedFit, SignalSpec, TimeGrid, WaveletBasis};

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::current_num_threads();
    let mut out = vec![("1-thread".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if default > 1 {
        out.push((
            format!("{default}-threads"),
            rayon::ThreadPoolBuilder::new().num_threads(default).build().unwrap(),
        ));
    }
    out
}

fn kernels(c: &mut Criterion) {
    let model = assemble(&BeamSpec::default()).unwrap();
    let grid = TimeGrid::from_rate(5000.0, 1.0).unwrap();
    let chirp = SignalSpec::Chirp {
        amplitude: 1.0,
        f0: 10.0,
        f1: 800.0,
    };
    let data = generate_dataset(&model, &[Phase::single(1.0, chirp)], &grid, 0.0, 1).unwrap();
    let omegas: Vec<f64> = (0..400).map(|i| 2.0 * std::f64::consts::PI * (10.0 + 2.0 * i as f64)).collect();
    let bank = FilterBank::haar();
    let cfg = FitConfig::default();

    let mut group = c.benchmark_group("parallel_vs_sequential");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("frf_continuous", &name), |b| {
            b.iter(|| pool.install(|| frf_continuous(black_box(&model.state_space), &omegas).unwrap()))
        });
        group.bench_function(BenchmarkId::new("lift_modwt", &name), |b| {
            b.iter(|| pool.install(|| lift_with(black_box(&data.outputs), &bank, 13, WaveletBasis::Modwt).unwrap()))
        });
        group.bench_function(BenchmarkId::new("prepared_fit", &name), |b| {
            b.iter(|| pool.install(|| PreparedFit::new(black_box(&data), &cfg).unwrap().solve(1e-12).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
