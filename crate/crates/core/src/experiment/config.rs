//! Flat `key = value` configuration with dotted sections.
//!
//! ```text
//! # comment
//! seed = 7
//! [network]
//! n_cells = 4
//! [agent]
//! hidden = 512, 512, 256
//! ```
//!
//! A `[section]` header prefixes every following key with `section.`; keys
//! may also be written fully dotted. Unknown, duplicate or malformed keys
//! are all collected and reported together.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::agent::AgentConfig;
use crate::error::{Error, Result};
use crate::netmodel::NetworkConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub episodes: usize,
    pub train_set_size: usize,
    /// Write an intermediate checkpoint every this many episodes; 0 disables.
    pub checkpoint_every: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig { episodes: 20_000, train_set_size: 5_000, checkpoint_every: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub episodes: usize,
    pub eval_set_size: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { episodes: 20_000, eval_set_size: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub agent: AgentConfig,
    pub training: TrainingConfig,
    pub eval: EvalConfig,
    /// Decision slots per episode; `None` means `5 N_C`.
    pub slots: Option<usize>,
    pub static_channel: bool,
    /// Per-BS feedback bits of the IFU-selection comparison.
    pub ifu_feedback_bits: usize,
    pub sweep_powers_dbm: Vec<f64>,
    pub oracle_instances: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Also write per-slot episode logs from evaluation.
    pub episode_logs: bool,
    /// Geometry and channel-trajectory CSVs for this many training instances.
    pub dump_instances: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            network: NetworkConfig::default(),
            agent: AgentConfig::default(),
            training: TrainingConfig::default(),
            eval: EvalConfig::default(),
            slots: None,
            static_channel: false,
            ifu_feedback_bits: 42,
            sweep_powers_dbm: (27..=33).map(f64::from).collect(),
            oracle_instances: 200,
            seed: 0,
            out_dir: PathBuf::from("out"),
            episode_logs: true,
            dump_instances: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn slots(&self) -> usize {
        self.slots.unwrap_or(5 * self.network.n_cells)
    }

    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        for r in [self.network.validate(), self.agent.validate()] {
            if let Err(Error::Config(items)) = r {
                p.extend(items);
            }
        }
        if self.training.episodes == 0 {
            p.push("training.episodes must be at least 1".into());
        }
        if self.training.train_set_size == 0 {
            p.push("training.train_set_size must be at least 1".into());
        }
        if self.eval.episodes == 0 {
            p.push("eval.episodes must be at least 1".into());
        }
        if self.eval.eval_set_size == 0 {
            p.push("eval.eval_set_size must be at least 1".into());
        }
        if self.slots == Some(0) {
            p.push("protocol.slots must be at least 1".into());
        }
        if self.sweep_powers_dbm.is_empty() || self.sweep_powers_dbm.iter().any(|x| !x.is_finite()) {
            p.push("sweep.powers_dbm must be a non-empty list of finite numbers".into());
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses and validates a configuration, starting from the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let (entries, mut problems) = tokenize(text);
        let mut cfg = ExperimentConfig::default();
        for (key, (line, value)) in &entries {
            if let Err(msg) = cfg.set(key, value) {
                problems.push(format!("line {line}: {key}: {msg}"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let n = &mut self.network;
        let a = &mut self.agent;
        match key {
            "seed" => self.seed = num(v)?,
            "network.n_cells" => n.n_cells = num(v)?,
            "network.n_tx" => n.n_tx = num(v)?,
            "network.cell_radius_m" => n.cell_radius_m = num(v)?,
            "network.tx_power_dbm" => n.tx_power_dbm = num(v)?,
            "network.noise_density_dbm_hz" => n.noise_density_dbm_hz = num(v)?,
            "network.bandwidth_hz" => n.bandwidth_hz = num(v)?,
            "network.carrier_hz" => n.carrier_hz = num(v)?,
            "network.slot_s" => n.slot_s = num(v)?,
            "network.user_speed_kmh" => n.user_speed_kmh = num(v)?,
            "network.pathloss_a_db" => n.pathloss_a_db = num(v)?,
            "network.pathloss_b" => n.pathloss_b = num(v)?,
            "network.min_bs_user_dist_m" => n.min_bs_user_dist_m = num(v)?,
            "agent.hidden" => a.hidden = list(v)?,
            "agent.learning_rate" => a.learning_rate = num(v)?,
            "agent.gamma" => a.gamma = num(v)?,
            "agent.batch_size" => a.batch_size = num(v)?,
            "agent.replay_capacity" => a.replay_capacity = num(v)?,
            "agent.target_sync_every" => a.target_sync_every = num(v)?,
            "agent.epsilon_start" => a.epsilon_start = num(v)?,
            "agent.epsilon_end" => a.epsilon_end = num(v)?,
            "agent.epsilon_decay_fraction" => a.epsilon_decay_fraction = num(v)?,
            "training.episodes" => self.training.episodes = num(v)?,
            "training.train_set_size" => self.training.train_set_size = num(v)?,
            "training.checkpoint_every" => self.training.checkpoint_every = num(v)?,
            "eval.episodes" => self.eval.episodes = num(v)?,
            "eval.eval_set_size" => self.eval.eval_set_size = num(v)?,
            "protocol.slots" => self.slots = Some(num(v)?),
            "protocol.static_channel" => self.static_channel = num(v)?,
            "protocol.ifu_feedback_bits" => self.ifu_feedback_bits = num(v)?,
            "sweep.powers_dbm" => self.sweep_powers_dbm = list(v)?,
            "oracle.instances" => self.oracle_instances = num(v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            "output.episode_logs" => self.episode_logs = num(v)?,
            "output.dump_instances" => self.dump_instances = num(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }
}

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?}"))
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(|s| num(s.trim())).collect()
}

/// `key -> (line, raw value)` with section prefixes applied, plus syntax
/// problems.
fn tokenize(text: &str) -> (BTreeMap<String, (usize, String)>, Vec<String>) {
    let mut out = BTreeMap::new();
    let mut problems = Vec::new();
    let mut section = String::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            problems.push(format!("line {line}: expected `key = value`, got {body:?}"));
            continue;
        };
        let key = key.trim();
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        if out.insert(full.clone(), (line, value.trim().to_string())).is_some() {
            problems.push(format!("line {line}: duplicate key {full}"));
        }
    }
    (out, problems)
}
