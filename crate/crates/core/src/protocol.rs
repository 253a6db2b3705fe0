//! The round-robin episode loop and backhaul accounting.
//!
//! Slot 0 initializes every weight vector to all-ones and logs the resulting
//! Max-SLNR rates. At slot `t >= 1` the channels advance one AR(1) step, the
//! previous agent broadcasts its `N_C`-bit weight vector, BS `t mod N_C`
//! builds its state from local CSI plus the weights it has heard, picks an
//! action, and every BS re-solves its beamformer against the slot-`t`
//! channels with its own (possibly unchanged) weights.

use std::io::Write;

use crate::agent::{build_state, gain_features, DqnAgent, DqnState, QNetwork, Transition};
use crate::beamform::{
    candidate_gains, cell_rates, decode_action, design_all, encode_action, ActionIndex, BeamVector, BetaVector,
};
use crate::error::{contract, Result};
use crate::netmodel::{generate_geometry, init_channels, ChannelProcess, ChannelTensor, Geometry, NetworkConfig};
use crate::seed::{derive_seed, Stream};

/// IFU-selection cells of the backhaul table as printed:
/// `(N_T, N_C, N_f, printed bits per slot)`.
pub const PRINTED_IFU_TABLE: [(usize, usize, usize, u64); 4] =
    [(3, 6, 3, 110), (3, 7, 5, 168), (4, 6, 42, 160), (4, 7, 42, 294)];

/// Seeds of one network instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSeeds {
    pub geometry: u64,
    pub channel: u64,
    pub fading: u64,
}

impl InstanceSeeds {
    pub fn derive(master: u64, index: u64) -> Self {
        let channel = derive_seed(master, Stream::Channel, index);
        InstanceSeeds {
            geometry: derive_seed(master, Stream::Geometry, index),
            channel,
            fading: derive_seed(channel, Stream::Channel, 1),
        }
    }
}

/// One simulated network: fixed geometry plus an evolving channel.
#[derive(Debug, Clone)]
pub struct Environment {
    pub cfg: NetworkConfig,
    pub geometry: Geometry,
    pub process: ChannelProcess,
    pub n0: f64,
    pub seeds: InstanceSeeds,
}

impl Environment {
    /// `static_channel` pins the fading correlation to 1.
    pub fn new(cfg: &NetworkConfig, seeds: InstanceSeeds, static_channel: bool) -> Result<Self> {
        cfg.validate()?;
        let geometry = generate_geometry(cfg, seeds.geometry);
        let tensor = init_channels(&geometry, cfg, seeds.channel)?;
        let rho = if static_channel { 1.0 } else { cfg.doppler_correlation() };
        Ok(Environment {
            cfg: cfg.clone(),
            geometry,
            process: ChannelProcess::new(tensor, rho, seeds.fading),
            n0: cfg.noise_power_w(),
            seeds,
        })
    }

    /// An environment around a given tensor, for hand-built channels.
    pub fn from_tensor(cfg: &NetworkConfig, geometry: Geometry, tensor: ChannelTensor, rho: f64) -> Result<Self> {
        if tensor.n_cells() != cfg.n_cells || tensor.n_tx() != cfg.n_tx {
            return Err(contract("tensor shape does not match config"));
        }
        Ok(Environment {
            cfg: cfg.clone(),
            geometry,
            process: ChannelProcess::new(tensor, rho, 0),
            n0: cfg.noise_power_w(),
            seeds: InstanceSeeds { geometry: 0, channel: 0, fading: 0 },
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cfg.n_cells
    }

    pub fn channels(&self) -> &ChannelTensor {
        &self.process.tensor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// What a policy sees when BS `agent` decides at slot `t`.
///
/// `state` is all a distributed policy may use. `betas` and `env` are genie
/// access for reference policies only.
pub struct DecisionContext<'a> {
    pub t: usize,
    pub agent: usize,
    pub state: &'a DqnState,
    pub betas: &'a [BetaVector],
    pub env: &'a Environment,
}

/// A source of actions for the acting BS.
pub trait Policy {
    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<ActionIndex>;

    /// Receives a completed transition in train mode. Returns the training
    /// loss if a step ran.
    fn observe(&mut self, _transition: Transition) -> Result<Option<f64>> {
        Ok(None)
    }
}

impl Policy for DqnAgent {
    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<ActionIndex> {
        DqnAgent::act(self, ctx.state)
    }

    fn observe(&mut self, transition: Transition) -> Result<Option<f64>> {
        DqnAgent::observe(self, transition)
    }
}

/// Greedy (`ε = 0`) read-only use of a trained network.
#[derive(Debug, Clone, Copy)]
pub struct GreedyQ<'a>(pub &'a QNetwork);

impl Policy for GreedyQ<'_> {
    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<ActionIndex> {
        let q = crate::agent::q_forward(self.0, ctx.state)?;
        Ok(ActionIndex::from_zero_based(crate::agent::argmax(&q)))
    }
}

/// The one inter-BS message of a slot: the previous agent's weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaMessage {
    pub from: usize,
    pub bits: Vec<bool>,
}

impl BetaMessage {
    pub fn bit_len(&self) -> u64 {
        self.bits.len() as u64
    }
}

/// Live protocol state between slots.
#[derive(Debug, Clone)]
pub struct ProtocolState {
    pub betas: Vec<BetaVector>,
    pub beams: Vec<BeamVector>,
    pub t: usize,
    pub prev_sum_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeMeta {
    pub episode: u64,
    pub seeds: InstanceSeeds,
    /// Feedback bits per BS of the IFU-selection comparison scheme.
    pub ifu_feedback_bits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub t: usize,
    pub agent: usize,
    pub action: ActionIndex,
    pub reward: f64,
    pub sum_rate: f64,
    pub rates: Vec<f64>,
    pub cum_bits_proposed: u64,
    pub cum_bits_ifu: u64,
    pub betas: Vec<BetaVector>,
    pub loss: Option<f64>,
}

/// `T + 1` slot records of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub meta: EpisodeMeta,
    pub n_cells: usize,
    pub slots: Vec<SlotRecord>,
}

impl EpisodeLog {
    pub fn csv_header(n_cells: usize) -> Vec<String> {
        let mut h: Vec<String> =
            ["episode", "t", "agent", "action", "reward", "sum_rate"].iter().map(|s| s.to_string()).collect();
        h.extend((1..=n_cells).map(|k| format!("rate_{k}")));
        h.push("cum_bits_proposed".into());
        h.push("cum_bits_ifu".into());
        h
    }

    pub fn write_csv_rows<W: Write>(&self, out: &mut csv::Writer<W>) -> Result<()> {
        for s in &self.slots {
            let mut row = vec![
                self.meta.episode.to_string(),
                s.t.to_string(),
                s.agent.to_string(),
                s.action.value().to_string(),
                s.reward.to_string(),
                s.sum_rate.to_string(),
            ];
            row.extend(s.rates.iter().map(|r| r.to_string()));
            row.push(s.cum_bits_proposed.to_string());
            row.push(s.cum_bits_ifu.to_string());
            out.write_record(&row)?;
        }
        Ok(())
    }

    /// Per-cell average rate (sum-rate over `N_C`) at slot `t`.
    pub fn per_cell_rate(&self, t: usize) -> f64 {
        self.slots[t].sum_rate / self.n_cells as f64
    }

    pub fn final_sum_rate(&self) -> f64 {
        self.slots.last().expect("at least slot 0").sum_rate
    }
}

pub fn compute_reward(r_new: f64, r_prev: f64) -> f64 {
    r_new - r_prev
}

/// Backhaul bits per slot of the proposed scheme.
pub fn info_bits_proposed(n_cells: usize) -> u64 {
    n_cells as u64
}

fn binomial(n: u64, k: u64) -> u128 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn ceil_log2(x: u128) -> u64 {
    if x <= 1 {
        0
    } else {
        (128 - (x - 1).leading_zeros()) as u64
    }
}

/// IFU-selection backhaul bits per slot,
/// `(N_C - 1)(N_f + ⌈log2 Σ_{α=1}^{N_T} C(N_C, α)⌉)`.
pub fn info_bits_ifu(n_tx: usize, n_cells: usize, n_f: usize) -> Result<u64> {
    if n_tx == 0 || n_cells == 0 {
        return Err(contract("antenna and cell counts must be positive"));
    }
    let total: u128 = (1..=n_tx as u64).map(|a| if a <= n_cells as u64 { binomial(n_cells as u64, a) } else { 0 }).sum();
    Ok((n_cells as u64 - 1) * (n_f as u64 + ceil_log2(total)))
}

/// Cumulative bits after slot `t`: no exchange at slot 0.
pub fn cumulative_bits(per_slot: u64, t: usize) -> u64 {
    per_slot * t as u64
}

/// Cumulative bits after slot `t`, also charging slot 0.
pub fn cumulative_bits_from_zero(per_slot: u64, t: usize) -> u64 {
    per_slot * (t as u64 + 1)
}

fn sum_and_rates(ch: &ChannelTensor, beams: &[BeamVector], n0: f64) -> (f64, Vec<f64>) {
    let rates = cell_rates(ch, beams, n0);
    (rates.iter().sum(), rates)
}

/// Runs one episode of `t_max` decision slots after the slot-0
/// initialization.
pub fn run_episode<P: Policy + ?Sized>(
    env: &mut Environment,
    policy: &mut P,
    t_max: usize,
    mode: Mode,
    meta: EpisodeMeta,
) -> Result<EpisodeLog> {
    let n = env.n_cells();
    let n0 = env.n0;
    let ifu_per_slot = info_bits_ifu(env.cfg.n_tx, n, meta.ifu_feedback_bits)?;

    let betas: Vec<BetaVector> = (0..n).map(|i| BetaVector::all_ones(n, i)).collect();
    let beams = design_all(env.channels(), &betas, n0)?;
    let (r0, rates0) = sum_and_rates(env.channels(), &beams, n0);
    let mut st = ProtocolState { betas, beams, t: 0, prev_sum_rate: r0 };
    // views[k][j]: BS k's knowledge of BS j's weights, fed only by messages
    let mut views: Vec<Vec<BetaVector>> = vec![st.betas.clone(); n];

    let mut slots = Vec::with_capacity(t_max + 1);
    slots.push(SlotRecord {
        t: 0,
        agent: 0,
        action: ActionIndex::all_ones(n),
        reward: 0.0,
        sum_rate: r0,
        rates: rates0,
        cum_bits_proposed: 0,
        cum_bits_ifu: 0,
        betas: st.betas.clone(),
        loss: None,
    });

    let mut pending: Option<(DqnState, ActionIndex, f64)> = None;
    let mut cum_bits = 0u64;
    for t in 1..=t_max {
        env.process.advance()?;
        let agent = t % n;
        let prev_agent = (t - 1) % n;

        let msg = BetaMessage { from: prev_agent, bits: st.betas[prev_agent].bits().to_vec() };
        debug_assert_eq!(msg.bit_len(), info_bits_proposed(n));
        cum_bits += msg.bit_len();
        for (k, view) in views.iter_mut().enumerate() {
            if k != msg.from {
                view[msg.from] = BetaVector::new(msg.bits.clone(), msg.from)?;
            }
        }

        let raw = candidate_gains(env.channels().row(agent), agent, n0)?;
        let state = build_state(&views[agent], &gain_features(&raw, n0), agent)?;
        let action = policy.act(&DecisionContext { t, agent, state: &state, betas: &st.betas, env })?;
        st.betas[agent] = decode_action(action, n, agent)?;
        views[agent][agent] = st.betas[agent].clone();

        st.beams = design_all(env.channels(), &st.betas, n0)?;
        let (r_t, rates) = sum_and_rates(env.channels(), &st.beams, n0);
        let reward = compute_reward(r_t, st.prev_sum_rate);
        st.prev_sum_rate = r_t;
        st.t = t;

        let mut loss = None;
        if mode == Mode::Train {
            if let Some((s, a, r)) = pending.take() {
                loss = policy.observe(Transition { state: s, action: a, reward: r, next_state: state.clone(), terminal: false })?;
            }
            if t == t_max {
                let next_state = state.clone();
                let l = policy.observe(Transition { state, action, reward, next_state, terminal: true })?;
                loss = l.or(loss);
            } else {
                pending = Some((state, action, reward));
            }
        }

        slots.push(SlotRecord {
            t,
            agent,
            action: encode_action(&st.betas[agent]),
            reward,
            sum_rate: r_t,
            rates,
            cum_bits_proposed: cum_bits,
            cum_bits_ifu: cumulative_bits(ifu_per_slot, t),
            betas: st.betas.clone(),
            loss,
        });
    }
    Ok(EpisodeLog { meta, n_cells: n, slots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::AgentConfig;
    use crate::baselines::{BetaRandom, GreedyBestResponse, MaxSlnr};
    use crate::netmodel::NetworkConfig;

    fn meta(seeds: InstanceSeeds) -> EpisodeMeta {
        EpisodeMeta { episode: 0, seeds, ifu_feedback_bits: 42 }
    }

    fn env(n_cells: usize, n_tx: usize, index: u64, static_channel: bool) -> Environment {
        let cfg = NetworkConfig { n_cells, n_tx, ..Default::default() };
        Environment::new(&cfg, InstanceSeeds::derive(11, index), static_channel).unwrap()
    }

    #[test]
    fn zero_slots_logs_the_max_slnr_start() {
        let mut e = env(3, 3, 0, false);
        let s = e.seeds;
        let log = run_episode(&mut e, &mut MaxSlnr, 0, Mode::Eval, meta(s)).unwrap();
        assert_eq!(log.slots.len(), 1);
        let betas: Vec<BetaVector> = (0..3).map(|i| BetaVector::all_ones(3, i)).collect();
        let beams = design_all(e.channels(), &betas, e.n0).unwrap();
        assert_eq!(log.slots[0].rates, cell_rates(e.channels(), &beams, e.n0));
        assert_eq!(log.slots[0].cum_bits_proposed, 0);
    }

    #[test]
    fn agents_rotate_round_robin() {
        let mut e = env(3, 2, 1, false);
        let s = e.seeds;
        let log = run_episode(&mut e, &mut BetaRandom::new(5), 5, Mode::Eval, meta(s)).unwrap();
        let agents: Vec<usize> = log.slots.iter().map(|s| s.agent).collect();
        assert_eq!(agents, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn only_the_agent_changes_weights_and_bits_grow_by_n_cells() {
        let mut e = env(4, 3, 2, false);
        let s = e.seeds;
        let log = run_episode(&mut e, &mut BetaRandom::new(9), 12, Mode::Eval, meta(s)).unwrap();
        assert!(log.slots[0].betas.iter().all(|b| b.bits().iter().all(|&x| x)));
        for w in log.slots.windows(2) {
            let changed: Vec<usize> = (0..4).filter(|&k| w[0].betas[k] != w[1].betas[k]).collect();
            assert!(changed.iter().all(|&k| k == w[1].agent), "{changed:?}");
            assert_eq!(w[1].cum_bits_proposed - w[0].cum_bits_proposed, 4);
            assert!(w[1].cum_bits_ifu >= w[0].cum_bits_ifu);
        }
    }

    #[test]
    fn static_channel_rewards_telescope_and_stay_put_is_zero() {
        let mut e = env(3, 2, 3, true);
        let s = e.seeds;
        let log = run_episode(&mut e, &mut BetaRandom::new(1), 15, Mode::Eval, meta(s)).unwrap();
        let total: f64 = log.slots.iter().map(|s| s.reward).sum();
        assert!((total - (log.final_sum_rate() - log.slots[0].sum_rate)).abs() < 1e-9);

        let mut e = env(3, 2, 3, true);
        let log = run_episode(&mut e, &mut MaxSlnr, 6, Mode::Eval, meta(s)).unwrap();
        assert!(log.slots.iter().all(|s| s.reward == 0.0));
    }

    #[test]
    fn greedy_on_static_channel_never_decreases_sum_rate() {
        for index in 0..5 {
            let mut e = env(3, 2, 20 + index, true);
            let s = e.seeds;
            let log = run_episode(&mut e, &mut GreedyBestResponse, 9, Mode::Eval, meta(s)).unwrap();
            for w in log.slots.windows(2) {
                assert!(w[1].sum_rate >= w[0].sum_rate, "{} < {}", w[1].sum_rate, w[0].sum_rate);
            }
        }
    }

    #[test]
    fn train_mode_feeds_one_transition_per_decision() {
        struct Counting(Vec<Transition>);
        impl Policy for Counting {
            fn act(&mut self, _: &DecisionContext<'_>) -> Result<ActionIndex> {
                Ok(ActionIndex::from_zero_based(0))
            }
            fn observe(&mut self, t: Transition) -> Result<Option<f64>> {
                self.0.push(t);
                Ok(None)
            }
        }
        let mut e = env(2, 2, 4, false);
        let s = e.seeds;
        let mut p = Counting(Vec::new());
        let log = run_episode(&mut e, &mut p, 6, Mode::Train, meta(s)).unwrap();
        assert_eq!(p.0.len(), 6);
        assert_eq!(p.0.iter().filter(|t| t.terminal).count(), 1);
        assert!(p.0.last().unwrap().terminal);
        for (k, tr) in p.0.iter().enumerate() {
            assert_eq!(tr.reward, log.slots[k + 1].reward);
        }
        for w in p.0.windows(2) {
            assert_eq!(w[0].next_state, w[1].state);
        }

        let mut e = env(2, 2, 4, false);
        let mut p = Counting(Vec::new());
        run_episode(&mut e, &mut p, 6, Mode::Eval, meta(s)).unwrap();
        assert!(p.0.is_empty());
    }

    #[test]
    fn dqn_agent_trains_through_the_loop() {
        let cfg = AgentConfig { hidden: vec![16], batch_size: 4, replay_capacity: 64, ..Default::default() };
        let mut agent = DqnAgent::new(2, cfg, 0).unwrap();
        let mut e = env(2, 2, 5, false);
        let s = e.seeds;
        run_episode(&mut e, &mut agent, 10, Mode::Train, meta(s)).unwrap();
        assert_eq!(agent.replay_len(), 10);
        assert_eq!(agent.train_steps(), 7);
    }

    #[test]
    fn reward_and_bit_counts() {
        assert_eq!(compute_reward(5.0, 3.0), 2.0);
        assert_eq!(info_bits_proposed(6), 6);
        assert_eq!(info_bits_proposed(7), 7);
        assert_eq!(info_bits_ifu(4, 7, 42).unwrap(), 294);
        assert_eq!(info_bits_ifu(4, 6, 42).unwrap(), 240);
        assert_eq!(info_bits_ifu(1, 2, 0).unwrap(), 1);
        assert_eq!(cumulative_bits(6, 10), 60);
        assert_eq!(cumulative_bits_from_zero(6, 10), 66);
    }

    #[test]
    fn ifu_formula_against_direct_enumeration() {
        // independent route: count nonempty subsets of size <= N_T by bitmask
        for n_c in 1..=8usize {
            for n_t in 1..=4usize {
                let count = (1u32..(1 << n_c)).filter(|m| m.count_ones() as usize <= n_t).count() as u64;
                let mut bits = 0;
                while (1u64 << bits) < count {
                    bits += 1;
                }
                assert_eq!(info_bits_ifu(n_t, n_c, 7).unwrap(), (n_c as u64 - 1) * (7 + bits));
            }
        }
    }

    #[test]
    fn episode_csv_has_one_row_per_slot() {
        let mut e = env(3, 2, 6, false);
        let s = e.seeds;
        let log = run_episode(&mut e, &mut MaxSlnr, 4, Mode::Eval, meta(s)).unwrap();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(EpisodeLog::csv_header(3)).unwrap();
        log.write_csv_rows(&mut w).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "episode,t,agent,action,reward,sum_rate,rate_1,rate_2,rate_3,cum_bits_proposed,cum_bits_ifu");
        assert!(lines[5].starts_with("0,4,1,8,"));
    }
}
