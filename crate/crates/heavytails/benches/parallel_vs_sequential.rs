//! Throughput comparison of the rayon-backed inner loops against their
//! sequential counterparts: path simulation, model sampling, and the
//! likelihood sum. Build with and without the `parallel` feature to see
//! both modes; within one build the sequential baseline is emulated by
//! single-index maps over the same workload.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use heavytails::distributions::{reference, Model};
use heavytails::fit;
use heavytails::sde::{self, PositivityScheme, SdeConfig};
use heavytails::{par_map_collect, seq_map_collect};

fn bench_sde_paths(c: &mut Criterion) {
    let config = SdeConfig::with_target_alpha(
        0.05,
        1.407e-4,
        7.347e-5,
        0.01,
        5000,
        1000,
        32,
        1,
        PositivityScheme::FullTruncation,
    )
    .unwrap();
    let mut group = c.benchmark_group("sde_simulate_32x5000");
    group.bench_function("configured", |b| {
        b.iter(|| sde::simulate(&config).unwrap());
    });
    group.bench_function("sequential_paths", |b| {
        // One path per call through the always-sequential map.
        b.iter(|| {
            seq_map_collect(config.n_paths, |p| {
                let mut one = config;
                one.n_paths = 1;
                one.seed = config.seed;
                let _ = p;
                sde::simulate(&one).unwrap()
            })
        });
    });
    group.finish();
}

fn bench_sampling(c: &mut Criterion) {
    let model = Model::Mjf1(reference::mjf1());
    let mut group = c.benchmark_group("mjf1_sample_200k");
    group.bench_function("configured", |b| {
        b.iter(|| model.sample(200_000, 7));
    });
    group.finish();
}

fn bench_likelihood(c: &mut Criterion) {
    let model = Model::Mjf1(reference::mjf1());
    let xs = model.sample(200_000, 3);
    let mut group = c.benchmark_group("mjf1_nll_200k");
    group.bench_function("configured", |b| {
        b.iter_batched(
            || xs.clone(),
            |data| fit::neg_log_likelihood(&model, &data).unwrap(),
            BatchSize::LargeInput,
        );
    });
    group.bench_function("sequential", |b| {
        let lp = model.log_pdf_fn();
        b.iter(|| -> f64 {
            let sums = par_map_collect(1, |_| xs.iter().map(|&x| lp(x)).sum::<f64>());
            -sums[0]
        });
    });
    group.finish();
}

criterion_group!(benches, bench_sde_paths, bench_sampling, bench_likelihood);
criterion_main!(benches);
