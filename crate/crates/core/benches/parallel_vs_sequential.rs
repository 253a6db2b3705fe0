//! Sequential against rayon-parallel execution of the data-parallel paths:
//! held-out evaluation rollouts and the joint exhaustive oracle.

use std::hint::black_box;

use bfdqn::agent::QNetwork;
use bfdqn::baselines::joint_exhaustive_oracle;
use bfdqn::experiment::{evaluate, ExperimentConfig};
use bfdqn::netmodel::{generate_geometry, init_channels, NetworkConfig};
use bfdqn::par::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn eval_rollouts(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::default();
    cfg.network.n_cells = 4;
    cfg.network.n_tx = 3;
    cfg.eval.episodes = 32;
    cfg.eval.eval_set_size = 32;
    cfg.slots = Some(8);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let net = QNetwork::he_uniform(&cfg.agent.widths(4), &mut rng).unwrap();
    let mut group = c.benchmark_group("evaluate_32_episodes");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(evaluate(&cfg, Some(&net), exec, None).unwrap()))
        });
    }
    group.finish();
}

fn joint_oracle(c: &mut Criterion) {
    let cfg = NetworkConfig { n_cells: 4, n_tx: 3, ..Default::default() };
    let ch = init_channels(&generate_geometry(&cfg, 1), &cfg, 1).unwrap();
    let n0 = cfg.noise_power_w();
    let mut group = c.benchmark_group("joint_oracle_4_cells");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(joint_exhaustive_oracle(&ch, n0, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, eval_rollouts, joint_oracle);
criterion_main!(benches);
