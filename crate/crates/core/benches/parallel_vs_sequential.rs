//! Sequential versus rayon fan-out for the two parallel hot spots: the MPPI
//! rollout batch inside one solve, and independent trials inside a batch.
//!
//! Build with `--no-default-features` to measure the fallback where both modes
//! run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use svmpc::control::{mppi_solve_with, ControlPlan, MppiConfig, VariantName};
use svmpc::cost::{CostSpec, TrajectoryObjective};
use svmpc::envs::presets;
use svmpc::exec::Exec;
use svmpc::harness::{run_trial_with, ControllerConfig, HarnessConfig, SuccessCriterion, TrialConfig};
use svmpc::inference::SvgdConfig;

fn cartpole_cost() -> CostSpec {
    CostSpec::diagonal(vec![1.0, 20.0, 0.1, 0.2], vec![1e-4], vec![5.0, 100.0, 1.0, 1.0], presets::cartpole_goal())
}

fn mppi(c: &mut Criterion) {
    let env = presets::cartpole();
    let spec = cartpole_cost();
    let objective = TrajectoryObjective::new(&spec, &env, &env.initial_state, 20).unwrap();
    let warm = ControlPlan::zeros(20, 1);
    let mut group = c.benchmark_group("mppi_solve");
    for k in [256usize, 1024] {
        let cfg = MppiConfig {
            num_samples: k,
            noise_std: Some(vec![5.0]),
            ..MppiConfig::default()
        };
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, k), &cfg, |b, cfg| {
                b.iter(|| mppi_solve_with(exec, &env, &warm, |p| objective.cost(p, &env.true_params), cfg, 7).unwrap())
            });
        }
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let base = TrialConfig {
        env: presets::cartpole(),
        cost: cartpole_cost(),
        controller: ControllerConfig::new(VariantName::SteinAdaptive),
        svgd: SvgdConfig::default(),
        mppi: MppiConfig {
            num_samples: 64,
            noise_std: Some(vec![5.0]),
            ..MppiConfig::default()
        },
        harness: HarnessConfig {
            duration: 0.2,
            horizon: 0.2,
            success: SuccessCriterion::cartpole_default(),
            initial_control: None,
            record_ksd: false,
        },
        seed: 0,
    };
    let seeds: Vec<u64> = (0..8).collect();
    let mut group = c.benchmark_group("batch");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| {
            seeds
                .iter()
                .map(|&seed| run_trial_with(Exec::Sequential, &TrialConfig { seed, ..base.clone() }).unwrap())
                .collect::<Vec<_>>()
        })
    });
    group.bench_function("parallel", |b| {
        b.iter(|| {
            Exec::Parallel.map_slice(&seeds, |&seed| {
                run_trial_with(Exec::Parallel, &TrialConfig { seed, ..base.clone() }).unwrap()
            })
        })
    });
    group.finish();
}

criterion_group!(benches, mppi, batch);
criterion_main!(benches);
