//! Implementations of the CLI subcommands. Each writes CSVs under an output
//! directory and returns a summary for programmatic use.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::agent::{DqnAgent, QNetwork};
use crate::baselines::{converged_greedy, joint_exhaustive_oracle, BetaRandom, GreedyBestResponse, MaxSlnr, JOINT_ORACLE_BOUND};
use crate::beamform::{design_all, sum_rate, BetaVector};
use crate::error::{contract, Error, Result};
use crate::netmodel::write_channels_csv;
use crate::par::{self, Execution};
use crate::protocol::{
    cumulative_bits, cumulative_bits_from_zero, info_bits_ifu, info_bits_proposed, run_episode, Environment,
    EpisodeLog, EpisodeMeta, GreedyQ, InstanceSeeds, Mode, Policy, PRINTED_IFU_TABLE,
};
use crate::seed::{derive_seed, Stream, TEST_INDEX_OFFSET};

pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
/// Evaluation episodes processed per parallel batch before their logs are
/// flushed.
const EVAL_CHUNK: usize = 256;

pub fn save_checkpoint(path: &Path, net: &QNetwork) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    net.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<QNetwork> {
    QNetwork::read_from(BufReader::new(File::open(path)?))
}

/// Loads a checkpoint and checks it against the configured network shape.
pub fn load_checkpoint_for(path: &Path, cfg: &ExperimentConfig) -> Result<QNetwork> {
    let net = load_checkpoint(path)?;
    let want = cfg.agent.widths(cfg.network.n_cells);
    if net.widths() != want {
        return Err(Error::ShapeMismatch(format!("checkpoint widths {:?} do not match config {:?}", net.widths(), want)));
    }
    Ok(net)
}

/// Training instance used by episode `e`: the set is cycled in order.
pub fn train_instance(episode: usize, train_set_size: usize) -> u64 {
    (episode % train_set_size) as u64
}

/// Held-out instance used by evaluation episode `k`.
pub fn test_instance(episode: usize, eval_set_size: usize) -> u64 {
    TEST_INDEX_OFFSET + (episode % eval_set_size) as u64
}

fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(dir.join(name))?)))
}

fn fmt(x: f64) -> String {
    x.to_string()
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub checkpoint: PathBuf,
    pub episodes: usize,
    pub train_steps: u64,
    /// Instance index of every episode, in order.
    pub instances: Vec<u64>,
    pub final_per_cell_rates: Vec<f64>,
}

/// Trains the shared network single-threaded, cycling the training set.
///
/// Writes `train_metrics.csv`, the final `checkpoint.bin`, periodic
/// `checkpoint_ep<N>.bin` files and optional instance dumps.
pub fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> Result<TrainSummary> {
    cfg.validate()?;
    if cfg.training.train_set_size as u64 >= TEST_INDEX_OFFSET {
        return Err(Error::Config(vec!["training.train_set_size overlaps the held-out index range".into()]));
    }
    fs::create_dir_all(out)?;
    let n = cfg.network.n_cells;
    let t_max = cfg.slots();
    dump_instances(cfg, out)?;

    let mut agent = DqnAgent::new(n, cfg.agent.clone(), derive_seed(cfg.seed, Stream::Agent, 0))?;
    let mut metrics = csv_writer(out, "train_metrics.csv")?;
    metrics.write_record([
        "episode",
        "instance",
        "epsilon",
        "train_steps",
        "mean_loss",
        "initial_per_cell_rate",
        "final_per_cell_rate",
    ])?;
    let mut summary = TrainSummary {
        checkpoint: out.join(CHECKPOINT_FILE),
        episodes: cfg.training.episodes,
        train_steps: 0,
        instances: Vec::with_capacity(cfg.training.episodes),
        final_per_cell_rates: Vec::with_capacity(cfg.training.episodes),
    };
    for e in 0..cfg.training.episodes {
        let instance = train_instance(e, cfg.training.train_set_size);
        let seeds = InstanceSeeds::derive(cfg.seed, instance);
        let mut env = Environment::new(&cfg.network, seeds, cfg.static_channel)?;
        agent.epsilon = cfg.agent.epsilon_at(e, cfg.training.episodes);
        let meta = EpisodeMeta { episode: e as u64, seeds, ifu_feedback_bits: cfg.ifu_feedback_bits };
        let log = run_episode(&mut env, &mut agent, t_max, Mode::Train, meta)?;
        let losses: Vec<f64> = log.slots.iter().filter_map(|s| s.loss).collect();
        let mean_loss = if losses.is_empty() { f64::NAN } else { losses.iter().sum::<f64>() / losses.len() as f64 };
        let final_rate = log.per_cell_rate(t_max);
        metrics.write_record([
            e.to_string(),
            instance.to_string(),
            fmt(agent.epsilon),
            agent.train_steps().to_string(),
            if losses.is_empty() { String::new() } else { fmt(mean_loss) },
            fmt(log.per_cell_rate(0)),
            fmt(final_rate),
        ])?;
        summary.instances.push(instance);
        summary.final_per_cell_rates.push(final_rate);
        if (e + 1) % 100 == 0 {
            log::info!("episode {} / {}: final per-cell rate {final_rate:.4}, loss {mean_loss:.4e}", e + 1, cfg.training.episodes);
        }
        let every = cfg.training.checkpoint_every;
        if every > 0 && (e + 1) % every == 0 && e + 1 < cfg.training.episodes {
            save_checkpoint(&out.join(format!("checkpoint_ep{}.bin", e + 1)), &agent.net)?;
        }
    }
    metrics.flush()?;
    save_checkpoint(&summary.checkpoint, &agent.net)?;
    summary.train_steps = agent.train_steps();
    Ok(summary)
}

fn dump_instances(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let count = cfg.dump_instances.min(cfg.training.train_set_size);
    if count == 0 {
        return Ok(());
    }
    let dir = out.join("instances");
    fs::create_dir_all(&dir)?;
    for k in 0..count as u64 {
        let mut env = Environment::new(&cfg.network, InstanceSeeds::derive(cfg.seed, k), cfg.static_channel)?;
        env.geometry.write_csv(BufWriter::new(File::create(dir.join(format!("geometry_{k}.csv")))?))?;
        let mut traj = vec![env.channels().clone()];
        for _ in 0..cfg.slots() {
            env.process.advance()?;
            traj.push(env.channels().clone());
        }
        write_channels_csv(BufWriter::new(File::create(dir.join(format!("channels_{k}.csv")))?), &traj)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Dqn,
    MaxSlnr,
    BetaRandom,
    Greedy,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Dqn => "dqn",
            PolicyKind::MaxSlnr => "max_slnr",
            PolicyKind::BetaRandom => "beta_random",
            PolicyKind::Greedy => "greedy",
        }
    }
}

/// Mean per-cell rate by slot for each evaluated policy.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCurves {
    pub policies: Vec<PolicyKind>,
    /// `rates[t][p]`: mean over episodes of the per-cell rate at slot `t`.
    pub rates: Vec<Vec<f64>>,
    pub episodes: usize,
}

impl EvalCurves {
    pub fn at(&self, t: usize, p: PolicyKind) -> Option<f64> {
        let k = self.policies.iter().position(|&q| q == p)?;
        Some(self.rates[t][k])
    }

    pub fn final_slot(&self) -> usize {
        self.rates.len() - 1
    }

    fn write_csv(&self, dir: &Path, name: &str) -> Result<()> {
        let mut w = csv_writer(dir, name)?;
        let mut header = vec!["t".to_string()];
        header.extend(self.policies.iter().map(|p| p.name().to_string()));
        w.write_record(&header)?;
        for (t, row) in self.rates.iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|&x| fmt(x)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn policies_for(net: Option<&QNetwork>) -> Vec<PolicyKind> {
    let mut p = Vec::with_capacity(4);
    if net.is_some() {
        p.push(PolicyKind::Dqn);
    }
    p.extend([PolicyKind::MaxSlnr, PolicyKind::BetaRandom, PolicyKind::Greedy]);
    p
}

/// One held-out instance rolled out under every policy from identical
/// channels.
fn eval_episode(cfg: &ExperimentConfig, net: Option<&QNetwork>, policies: &[PolicyKind], k: usize) -> Result<Vec<EpisodeLog>> {
    let index = test_instance(k, cfg.eval.eval_set_size);
    debug_assert!(index >= cfg.training.train_set_size as u64);
    let seeds = InstanceSeeds::derive(cfg.seed, index);
    let env = Environment::new(&cfg.network, seeds, cfg.static_channel)?;
    let meta = EpisodeMeta { episode: k as u64, seeds, ifu_feedback_bits: cfg.ifu_feedback_bits };
    policies
        .iter()
        .map(|&p| {
            let mut env = env.clone();
            let mut policy: Box<dyn Policy> = match p {
                PolicyKind::Dqn => Box::new(GreedyQ(net.expect("dqn column requires a network"))),
                PolicyKind::MaxSlnr => Box::new(MaxSlnr),
                PolicyKind::BetaRandom => Box::new(BetaRandom::new(derive_seed(cfg.seed, Stream::BetaRandom, k as u64))),
                PolicyKind::Greedy => Box::new(GreedyBestResponse),
            };
            run_episode(&mut env, policy.as_mut(), cfg.slots(), Mode::Eval, meta)
        })
        .collect()
}

/// Rolls out `cfg.eval.episodes` held-out episodes under every policy.
/// With `log_dir`, per-slot logs go to `eval_log_<policy>.csv` there.
pub fn evaluate(cfg: &ExperimentConfig, net: Option<&QNetwork>, exec: Execution, log_dir: Option<&Path>) -> Result<EvalCurves> {
    cfg.validate()?;
    if (cfg.training.train_set_size as u64) > TEST_INDEX_OFFSET {
        return Err(contract("held-out instances would overlap the training set"));
    }
    let policies = policies_for(net);
    let t_max = cfg.slots();
    let mut writers = match log_dir {
        Some(dir) => Some(
            policies
                .iter()
                .map(|p| {
                    let mut w = csv_writer(dir, &format!("eval_log_{}.csv", p.name()))?;
                    w.write_record(EpisodeLog::csv_header(cfg.network.n_cells))?;
                    Ok(w)
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    let mut sums = vec![vec![0.0; policies.len()]; t_max + 1];
    let mut start = 0;
    while start < cfg.eval.episodes {
        let len = EVAL_CHUNK.min(cfg.eval.episodes - start);
        let chunk = par::try_map_indexed(exec, len, |k| eval_episode(cfg, net, &policies, start + k))?;
        for logs in &chunk {
            for (p, log) in logs.iter().enumerate() {
                for t in 0..=t_max {
                    sums[t][p] += log.per_cell_rate(t);
                }
                if let Some(ws) = writers.as_mut() {
                    log.write_csv_rows(&mut ws[p])?;
                }
            }
        }
        start += len;
    }
    if let Some(ws) = writers.as_mut() {
        for w in ws {
            w.flush()?;
        }
    }
    let m = cfg.eval.episodes as f64;
    let rates = sums.into_iter().map(|row| row.into_iter().map(|s| s / m).collect()).collect();
    Ok(EvalCurves { policies, rates, episodes: cfg.eval.episodes })
}

/// Greedy rollouts of a trained network against the baselines. Writes
/// `eval_curve.csv` (mean per-cell rate per slot) and, when enabled, the
/// per-policy episode logs.
pub fn cmd_eval(cfg: &ExperimentConfig, net: &QNetwork, out: &Path, exec: Execution) -> Result<EvalCurves> {
    fs::create_dir_all(out)?;
    check_shape(cfg, net)?;
    let curves = evaluate(cfg, Some(net), exec, cfg.episode_logs.then_some(out))?;
    curves.write_csv(out, "eval_curve.csv")?;
    Ok(curves)
}

fn check_shape(cfg: &ExperimentConfig, net: &QNetwork) -> Result<()> {
    let want = cfg.agent.widths(cfg.network.n_cells);
    if net.widths() != want {
        return Err(Error::ShapeMismatch(format!("network widths {:?} do not match config {:?}", net.widths(), want)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub power_dbm: f64,
    pub policies: Vec<PolicyKind>,
    /// Mean per-cell rate at the final slot, per policy.
    pub final_rates: Vec<f64>,
}

impl SweepPoint {
    pub fn rate(&self, p: PolicyKind) -> Option<f64> {
        Some(self.final_rates[self.policies.iter().position(|&q| q == p)?])
    }
}

/// Repeats evaluation at each transmit power on the same instance seeds.
/// Writes `sweep_power.csv`.
pub fn cmd_sweep_power(cfg: &ExperimentConfig, net: Option<&QNetwork>, out: &Path, exec: Execution) -> Result<Vec<SweepPoint>> {
    fs::create_dir_all(out)?;
    if let Some(net) = net {
        check_shape(cfg, net)?;
    }
    let mut points = Vec::with_capacity(cfg.sweep_powers_dbm.len());
    for &p in &cfg.sweep_powers_dbm {
        let mut c = cfg.clone();
        c.network.tx_power_dbm = p;
        let curves = evaluate(&c, net, exec, None)?;
        let last = curves.final_slot();
        points.push(SweepPoint { power_dbm: p, final_rates: curves.rates[last].clone(), policies: curves.policies });
        log::info!("sweep point {p} dBm done");
    }
    let mut w = csv_writer(out, "sweep_power.csv")?;
    let policies = policies_for(net);
    let mut header = vec!["power_dbm".to_string()];
    header.extend(policies.iter().map(|p| p.name().to_string()));
    if net.is_some() {
        header.push("dqn_gain_over_max_slnr_pct".into());
    }
    w.write_record(&header)?;
    for pt in &points {
        let mut rec = vec![fmt(pt.power_dbm)];
        rec.extend(pt.final_rates.iter().map(|&x| fmt(x)));
        if let (Some(d), Some(m)) = (pt.rate(PolicyKind::Dqn), pt.rate(PolicyKind::MaxSlnr)) {
            rec.push(fmt(100.0 * (d - m) / m));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n_tx: usize,
    pub n_cells: usize,
    pub n_f: usize,
    pub proposed: u64,
    pub ifu_formula: u64,
    pub ifu_printed: u64,
}

impl TableRow {
    pub fn printed_matches(&self) -> bool {
        self.ifu_formula == self.ifu_printed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoExchange {
    /// `(t, proposed, ifu)` cumulative bits with no exchange at slot 0.
    pub cumulative: Vec<(usize, u64, u64)>,
    pub table: Vec<TableRow>,
}

/// Cumulative backhaul bits for the configured network, plus the printed
/// comparison table re-evaluated from its formula. Writes
/// `info_exchange.csv` and `info_table.csv`.
pub fn cmd_info_exchange(cfg: &ExperimentConfig, t_max: usize, out: &Path) -> Result<InfoExchange> {
    fs::create_dir_all(out)?;
    let n = cfg.network.n_cells;
    let proposed = info_bits_proposed(n);
    let ifu = info_bits_ifu(cfg.network.n_tx, n, cfg.ifu_feedback_bits)?;
    let mut w = csv_writer(out, "info_exchange.csv")?;
    w.write_record(["t", "proposed", "ifu", "proposed_incl_slot0", "ifu_incl_slot0"])?;
    let mut cumulative = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let (p, f) = (cumulative_bits(proposed, t), cumulative_bits(ifu, t));
        w.write_record([
            t.to_string(),
            p.to_string(),
            f.to_string(),
            cumulative_bits_from_zero(proposed, t).to_string(),
            cumulative_bits_from_zero(ifu, t).to_string(),
        ])?;
        cumulative.push((t, p, f));
    }
    w.flush()?;

    let mut w = csv_writer(out, "info_table.csv")?;
    w.write_record(["n_tx", "n_cells", "n_f", "proposed", "ifu_formula", "ifu_printed", "printed_matches_formula"])?;
    let mut table = Vec::with_capacity(PRINTED_IFU_TABLE.len());
    for (n_tx, n_cells, n_f, printed) in PRINTED_IFU_TABLE {
        let row = TableRow {
            n_tx,
            n_cells,
            n_f,
            proposed: info_bits_proposed(n_cells),
            ifu_formula: info_bits_ifu(n_tx, n_cells, n_f)?,
            ifu_printed: printed,
        };
        if !row.printed_matches() {
            log::warn!(
                "printed IFU bits {} for (N_T={n_tx}, N_C={n_cells}, N_f={n_f}) differ from the formula value {}",
                row.ifu_printed,
                row.ifu_formula
            );
        }
        w.write_record([
            n_tx.to_string(),
            n_cells.to_string(),
            n_f.to_string(),
            row.proposed.to_string(),
            row.ifu_formula.to_string(),
            row.ifu_printed.to_string(),
            row.printed_matches().to_string(),
        ])?;
        table.push(row);
    }
    w.flush()?;
    Ok(InfoExchange { cumulative, table })
}

/// Per-cell rates of one static instance under each reference.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub instance: u64,
    pub joint: f64,
    pub greedy: f64,
    pub dqn: Option<f64>,
    pub max_slnr: f64,
}

/// Joint exhaustive optimum against converged greedy, the trained network
/// (after `slots` static-channel decisions) and Max-SLNR. Writes
/// `oracle_compare.csv`.
pub fn cmd_oracle_compare(cfg: &ExperimentConfig, net: Option<&QNetwork>, out: &Path, exec: Execution) -> Result<Vec<OracleRow>> {
    cfg.validate()?;
    let n = cfg.network.n_cells;
    let count = (1u128 << n).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > JOINT_ORACLE_BOUND {
        return Err(Error::TooLarge { count, bound: JOINT_ORACLE_BOUND });
    }
    if let Some(net) = net {
        check_shape(cfg, net)?;
    }
    fs::create_dir_all(out)?;
    let per_cell = |r: f64| r / n as f64;
    let rows = par::try_map_indexed(exec, cfg.oracle_instances, |k| -> Result<OracleRow> {
        let instance = test_instance(k, usize::MAX);
        let seeds = InstanceSeeds::derive(cfg.seed, instance);
        let env = Environment::new(&cfg.network, seeds, true)?;
        let (ch, n0) = (env.channels(), env.n0);
        let joint = joint_exhaustive_oracle(ch, n0, Execution::Sequential)?.sum_rate;
        let (_, greedy) = converged_greedy(ch, n0, 64)?;
        let ones: Vec<BetaVector> = (0..n).map(|i| BetaVector::all_ones(n, i)).collect();
        let max_slnr = sum_rate(ch, &design_all(ch, &ones, n0)?, n0);
        let dqn = match net {
            Some(net) => {
                let meta = EpisodeMeta { episode: k as u64, seeds, ifu_feedback_bits: cfg.ifu_feedback_bits };
                let mut env = env.clone();
                Some(run_episode(&mut env, &mut GreedyQ(net), cfg.slots(), Mode::Eval, meta)?.final_sum_rate())
            }
            None => None,
        };
        Ok(OracleRow {
            instance,
            joint: per_cell(joint),
            greedy: per_cell(greedy),
            dqn: dqn.map(per_cell),
            max_slnr: per_cell(max_slnr),
        })
    })?;
    let mut w = csv_writer(out, "oracle_compare.csv")?;
    let mut header = vec!["instance", "joint", "greedy"];
    if net.is_some() {
        header.push("dqn");
    }
    header.push("max_slnr");
    w.write_record(&header)?;
    for r in &rows {
        let mut rec = vec![r.instance.to_string(), fmt(r.joint), fmt(r.greedy)];
        if let Some(d) = r.dqn {
            rec.push(fmt(d));
        }
        rec.push(fmt(r.max_slnr));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(rows)
}
