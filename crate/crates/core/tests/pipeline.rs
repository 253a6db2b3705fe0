//! End-to-end runs of the command layer on a toy configuration.

use bfdqn::experiment::{
    cmd_eval, cmd_info_exchange, cmd_oracle_compare, cmd_train, evaluate, load_checkpoint, load_checkpoint_for,
    save_checkpoint, ExperimentConfig, PolicyKind,
};
use bfdqn::par::Execution;
use bfdqn::Error;

fn toy() -> ExperimentConfig {
    ExperimentConfig::parse(
        "seed = 11\n[network]\nn_cells = 2\nn_tx = 2\n[agent]\nhidden = 16, 8\nbatch_size = 4\n\
         [training]\nepisodes = 6\ntrain_set_size = 3\n[eval]\nepisodes = 5\neval_set_size = 5\n\
         [oracle]\ninstances = 3\n",
    )
    .unwrap()
}

#[test]
fn train_then_eval_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy();
    let s = cmd_train(&cfg, dir.path()).unwrap();
    assert_eq!(s.episodes, 6);
    assert_eq!(s.instances, vec![0, 1, 2, 0, 1, 2]);
    assert!(s.train_steps > 0);

    let net = load_checkpoint_for(&s.checkpoint, &cfg).unwrap();
    // exact round trip through a second file
    let again = dir.path().join("again.bin");
    save_checkpoint(&again, &net).unwrap();
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&s.checkpoint).unwrap());
    assert_eq!(load_checkpoint(&again).unwrap(), net);

    let curves = cmd_eval(&cfg, &net, dir.path(), Execution::Sequential).unwrap();
    assert_eq!(curves.rates.len(), cfg.slots() + 1);
    assert_eq!(curves.episodes, 5);
    for t in 0..=cfg.slots() {
        assert!(curves.at(t, PolicyKind::Dqn).unwrap().is_finite());
    }
    // slot 0 is all-ones for every policy
    let r0 = &curves.rates[0];
    assert!(r0.iter().all(|&r| r == r0[0]));
    for name in ["train_metrics.csv", "eval_curve.csv", "eval_log_dqn.csv", "eval_log_max_slnr.csv"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }

    let par = evaluate(&cfg, Some(&net), Execution::Parallel, None).unwrap();
    assert_eq!(par, curves);
}

#[test]
fn checkpoint_for_a_different_shape_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy();
    let s = cmd_train(&cfg, dir.path()).unwrap();
    let mut other = cfg.clone();
    other.network.n_cells = 3;
    assert!(matches!(load_checkpoint_for(&s.checkpoint, &other), Err(Error::ShapeMismatch(..))));
}

#[test]
fn oracle_bounds_every_heuristic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy();
    let rows = cmd_oracle_compare(&cfg, None, dir.path(), Execution::Sequential).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r.joint >= r.greedy - 1e-9 && r.joint >= r.max_slnr - 1e-9, "{r:?}");
    }
}

#[test]
fn info_exchange_is_linear_in_slots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy();
    let info = cmd_info_exchange(&cfg, 10, dir.path()).unwrap();
    let (t, proposed, _) = *info.cumulative.last().unwrap();
    assert_eq!(t, 10);
    assert_eq!(proposed, 10 * 2);
}
