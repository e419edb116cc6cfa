//! Hot-path benchmarks: full trajectories per policy, the Bayes step, the
//! LMMI phase rule, Holevo eigendecomposition, and a small batch.

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

use homodyne_core::information::holevo_information;
use homodyne_core::policy::lmmi_phase;
use homodyne_core::trajectory::{bayes_update, run_trajectory};
use homodyne_core::{Ensemble, GaussianNoise, PolicySpec, SimConfig};

fn bench_trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("trajectory");
    for name in ["8psk", "16qam", "star"] {
        let ensemble = Ensemble::by_name(name).unwrap();
        let cfg = SimConfig::default();
        for policy in [
            PolicySpec::heterodyne(),
            PolicySpec::wiseman(),
            PolicySpec::lmmi(),
        ] {
            group.bench_with_input(
                BenchmarkId::new(policy.name(), name),
                &policy,
                |b, policy| {
                    let mut seed = 0u64;
                    b.iter_batched(
                        || {
                            seed += 1;
                            GaussianNoise::from_seed(seed)
                        },
                        |mut noise| {
                            run_trajectory(&ensemble, 0, policy, &cfg, &mut noise).unwrap()
                        },
                        BatchSize::SmallInput,
                    )
                },
            );
        }
    }
    group.finish();
}

fn bench_bayes_step(c: &mut Criterion) {
    let ensemble = Ensemble::qam16();
    let posterior = ensemble.priors();
    c.bench_function("bayes_update/16qam", |b| {
        b.iter(|| bayes_update(&posterior, 0.03, &ensemble, 0.4, 1.0, 5e-3))
    });
}

fn bench_lmmi_phase(c: &mut Criterion) {
    let ensemble = Ensemble::qam16();
    let mut posterior = ensemble.priors();
    posterior[3] += 0.05;
    posterior[12] -= 0.05;
    c.bench_function("lmmi_phase/16qam", |b| b.iter(|| lmmi_phase(&posterior, &ensemble)));
}

fn bench_holevo(c: &mut Criterion) {
    let ensemble = Ensemble::star();
    c.bench_function("holevo/star_nmax100", |b| {
        b.iter(|| holevo_information(&ensemble, 100).unwrap())
    });
}

fn bench_batch(c: &mut Criterion) {
    let ensemble = Ensemble::by_name("8psk").unwrap();
    let cfg = SimConfig::default().with_seed(1);
    let mut group = c.benchmark_group("run_batch");
    group.sample_size(10);
    group.bench_function("8psk_lmmi_n100", |b| {
        b.iter(|| homodyne_core::montecarlo::run_batch(&ensemble, &PolicySpec::lmmi(), &cfg, 100))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_trajectories,
    bench_bayes_step,
    bench_lmmi_phase,
    bench_holevo,
    bench_batch
);
criterion_main!(benches);
