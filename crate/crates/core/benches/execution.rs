use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;

use sbbo::acquisition::{incumbent, UtilitySpec};
use sbbo::benchmarks::{BqpInstance, Objective};
use sbbo::harness::config::{BenchmarkId as Bench, ExperimentConfig, Method};
use sbbo::harness::experiment::run_experiment;
use sbbo::sampler::stationary_check;
use sbbo::surrogate::{GpOptions, TanimotoGp};
use sbbo::{Dataset, Execution, Prng, Proposal, Sense, SpaceSpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn psi_estimation(c: &mut Criterion) {
    let space = SpaceSpec::binary(6).unwrap();
    let bqp = BqpInstance::new(6, 10.0, 0.0, 0).unwrap();
    let mut rng = Prng::seed_from_u64(0);
    let mut data = Dataset::new();
    for _ in 0..10 {
        let x = space.sample_uniform(&mut rng);
        let y = bqp.evaluate(&x).unwrap();
        data.push(x, y);
    }
    let gp = TanimotoGp::fit(&data, &space, &GpOptions::default()).unwrap();
    let utility = UtilitySpec::expected_improvement(incumbent(&data, Sense::Maximize).unwrap(), Sense::Maximize);

    let mut group = c.benchmark_group("stationary_check");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| stationary_check(&gp, &utility, &space, &Proposal::UniformFlip, 1, 1000, 20_000, 0, mode).unwrap())
        });
    }
    group.finish();
}

fn repetitions(c: &mut Criterion) {
    let mut config = ExperimentConfig::new(Bench::Bqp, Method::SbboGp);
    config.budget = Some(10);
    config.n_reps = 8;
    config.sbbo.n_mcmc_iters = 100;
    config.sbbo.burn_in = 50;

    let mut group = c.benchmark_group("repetitions");
    group.sample_size(10);
    for (name, mode) in MODES {
        config.execution = mode;
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_experiment(&config).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, psi_estimation, repetitions);
criterion_main!(benches);
