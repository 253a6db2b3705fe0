//! The shared deep Q-network: state assembly, experience replay,
//! ε-greedy action selection and the DQN training step.
//!
//! Every BS reads and trains the same parameter set. Training is serialized
//! through [`DqnAgent`]; evaluation can share a `&QNetwork` across threads.

pub mod mlp;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use mlp::{Adam, Dense, QNetwork};

use crate::beamform::{ActionIndex, BetaVector};
use crate::error::{contract, Error, Result};

/// Hidden widths of the 7-layer network.
pub const DEFAULT_HIDDEN: [usize; 6] = [512, 512, 256, 256, 128, 128];

/// Input vector of the Q-network for one agent and slot.
///
/// Layout: own previous weights (`N_C`), the other BSs' previous weights in
/// ascending cell order (`N_C (N_C - 1)`), then the per-action gain vectors
/// `g^{[1]} … g^{[2^{N_C}]}` (`N_C 2^{N_C}`).
#[derive(Debug, Clone, PartialEq)]
pub struct DqnState {
    values: Vec<f64>,
}

impl DqnState {
    /// Wraps a raw feature vector, for inputs assembled outside
    /// [`build_state`].
    pub fn from_values(values: Vec<f64>) -> Self {
        DqnState { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn build_state(betas_prev: &[BetaVector], gains: &[Vec<f64>], agent: usize) -> Result<DqnState> {
    let n = betas_prev.len();
    if agent >= n {
        return Err(contract(format!("agent {agent} out of range for {n} cells")));
    }
    if betas_prev.iter().any(|b| b.len() != n) {
        return Err(contract("every beta vector must have N_C entries"));
    }
    if gains.len() != 1 << n || gains.iter().any(|g| g.len() != n) {
        return Err(contract("expected 2^N_C gain vectors of length N_C"));
    }
    if gains.iter().flatten().any(|g| !(*g >= 0.0) || !g.is_finite()) {
        return Err(contract("gain entries must be finite and nonnegative"));
    }
    let mut values = Vec::with_capacity(n * (n + (1 << n)));
    values.extend(betas_prev[agent].as_reals());
    for (k, b) in betas_prev.iter().enumerate() {
        if k != agent {
            values.extend(b.as_reals());
        }
    }
    for g in gains {
        values.extend_from_slice(g);
    }
    Ok(DqnState { values })
}

/// Maps raw received powers to `log10(1 + g / N0)`: the gains in SNR units,
/// log-compressed so they sit on the same scale as the binary weights.
pub fn gain_features(gains: &[Vec<f64>], n0: f64) -> Vec<Vec<f64>> {
    gains.iter().map(|g| g.iter().map(|&x| (x / n0).ln_1p() / std::f64::consts::LN_10).collect()).collect()
}

/// Q-values of one state.
pub fn q_forward(net: &QNetwork, s: &DqnState) -> Result<Vec<f64>> {
    if s.len() != net.input_len() {
        return Err(contract(format!("state length {} does not match network input {}", s.len(), net.input_len())));
    }
    net.forward(s.values())
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = k;
        }
    }
    best
}

/// ε-greedy: uniform over all actions with probability `ε`, otherwise the
/// greedy action.
pub fn select_action<R: Rng>(net: &QNetwork, s: &DqnState, epsilon: f64, rng: &mut R) -> Result<ActionIndex> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(contract(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let n_actions = net.output_len();
    if rng.random::<f64>() < epsilon {
        return Ok(ActionIndex::from_zero_based(rng.random_range(0..n_actions)));
    }
    Ok(ActionIndex::from_zero_based(argmax(&q_forward(net, s)?)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: DqnState,
    pub action: ActionIndex,
    pub reward: f64,
    pub next_state: DqnState,
    pub terminal: bool,
}

/// Fixed-capacity ring of transitions with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { items: VecDeque::with_capacity(capacity.min(1 << 16)), capacity }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    /// `batch` transitions drawn uniformly with replacement, or `None` while
    /// the buffer holds fewer than `batch` items.
    pub fn sample<R: Rng>(&self, batch: usize, rng: &mut R) -> Option<Vec<&Transition>> {
        if batch == 0 || self.items.len() < batch {
            return None;
        }
        Some((0..batch).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect())
    }
}

/// Mean-squared TD error on the taken actions and its gradient.
///
/// Targets are `r + γ max_a' Q_target(s', a')`, or `r` for terminal
/// transitions. The target network is not differentiated.
pub fn td_loss_and_gradients(
    net: &QNetwork,
    target: &QNetwork,
    batch: &[&Transition],
    gamma: f64,
) -> Result<(f64, mlp::Gradients)> {
    if batch.is_empty() {
        return Err(contract("training batch must be non-empty"));
    }
    let b = batch.len();
    let width = net.input_len();
    if target.widths() != net.widths() {
        return Err(Error::ShapeMismatch("online and target networks differ in shape".into()));
    }
    let mut states = Vec::with_capacity(b * width);
    let mut next = Vec::with_capacity(b * width);
    for t in batch {
        if t.state.len() != width || t.next_state.len() != width {
            return Err(Error::ShapeMismatch(format!("transition state width differs from network input {width}")));
        }
        states.extend_from_slice(t.state.values());
        next.extend_from_slice(t.next_state.values());
    }
    let n_actions = net.output_len();
    let targets: Vec<f64> = if gamma == 0.0 || batch.iter().all(|t| t.terminal) {
        batch.iter().map(|t| t.reward).collect()
    } else {
        let q_next = target.forward_batch(&next, b)?;
        batch
            .iter()
            .zip(q_next.chunks_exact(n_actions))
            .map(|(t, q)| {
                if t.terminal {
                    t.reward
                } else {
                    t.reward + gamma * q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                }
            })
            .collect()
    };
    let cache = net.forward_cached(&states, b)?;
    let q = cache.output();
    let mut d_out = vec![0.0; b * n_actions];
    let mut loss = 0.0;
    for (k, (t, y)) in batch.iter().zip(&targets).enumerate() {
        let a = t.action.zero_based();
        if a >= n_actions {
            return Err(contract(format!("action {} outside network output", t.action.value())));
        }
        let err = q[k * n_actions + a] - y;
        loss += err * err;
        d_out[k * n_actions + a] = 2.0 * err / b as f64;
    }
    loss /= b as f64;
    Ok((loss, net.backward(&cache, &d_out)))
}

/// One Adam step on the online network. Returns the pre-update loss.
pub fn train_step(
    net: &mut QNetwork,
    target: &QNetwork,
    adam: &mut Adam,
    batch: &[&Transition],
    gamma: f64,
) -> Result<f64> {
    let (loss, grads) = td_loss_and_gradients(net, target, batch, gamma)?;
    if !loss.is_finite() {
        return Err(Error::TrainingFault { step: adam.steps() + 1, loss });
    }
    adam.apply(net, &grads);
    Ok(loss)
}

/// Copies every parameter of `net` into `target`.
pub fn sync_target(net: &QNetwork, target: &mut QNetwork) -> Result<()> {
    target.copy_from(net)
}

/// Hyperparameters of the shared agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub target_sync_every: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of training episodes over which ε decays linearly.
    pub epsilon_decay_fraction: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            hidden: DEFAULT_HIDDEN.to_vec(),
            learning_rate: 0.003,
            gamma: 0.99,
            batch_size: 64,
            replay_capacity: 50_000,
            target_sync_every: 200,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_fraction: 0.3,
        }
    }
}

impl AgentConfig {
    pub fn widths(&self, n_cells: usize) -> Vec<usize> {
        let mut w = vec![n_cells * (n_cells + (1 << n_cells))];
        w.extend_from_slice(&self.hidden);
        w.push(1 << n_cells);
        w
    }

    /// ε for training episode `episode` of `total`.
    pub fn epsilon_at(&self, episode: usize, total: usize) -> f64 {
        let horizon = self.epsilon_decay_fraction * total as f64;
        if horizon <= 0.0 || episode as f64 >= horizon {
            return self.epsilon_end;
        }
        let frac = episode as f64 / horizon;
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }

    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.hidden.contains(&0) {
            p.push("agent.hidden widths must be positive".to_string());
        }
        if !(self.learning_rate > 0.0) {
            p.push("agent.learning_rate must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            p.push("agent.gamma must lie in [0, 1]".to_string());
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            p.push("agent.batch_size must be positive and at most agent.replay_capacity".to_string());
        }
        if self.target_sync_every == 0 {
            p.push("agent.target_sync_every must be positive".to_string());
        }
        for (name, v) in [("agent.epsilon_start", self.epsilon_start), ("agent.epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&v) {
                p.push(format!("{name} must lie in [0, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay_fraction) {
            p.push("agent.epsilon_decay_fraction must lie in [0, 1]".to_string());
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }
}

/// The online network, its target copy, optimizer, replay memory and the
/// agent's private random stream.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub net: QNetwork,
    pub target: QNetwork,
    adam: Adam,
    replay: ReplayBuffer,
    rng: ChaCha8Rng,
    cfg: AgentConfig,
    pub epsilon: f64,
    train_steps: u64,
}

impl DqnAgent {
    pub fn new(n_cells: usize, cfg: AgentConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = QNetwork::he_uniform(&cfg.widths(n_cells), &mut rng)?;
        Ok(Self::with_network(net, cfg, rng))
    }

    pub fn from_network(net: QNetwork, cfg: AgentConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::with_network(net, cfg, ChaCha8Rng::seed_from_u64(seed)))
    }

    fn with_network(net: QNetwork, cfg: AgentConfig, rng: ChaCha8Rng) -> Self {
        DqnAgent {
            target: net.clone(),
            adam: Adam::new(&net, cfg.learning_rate),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            net,
            rng,
            epsilon: cfg.epsilon_start,
            cfg,
            train_steps: 0,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    pub fn replay_len(&self) -> usize {
        self.replay.len()
    }

    pub fn act(&mut self, s: &DqnState) -> Result<ActionIndex> {
        select_action(&self.net, s, self.epsilon, &mut self.rng)
    }

    /// Stores a transition and, once the buffer holds a full batch, runs one
    /// training step. Returns that step's loss.
    pub fn observe(&mut self, t: Transition) -> Result<Option<f64>> {
        if t.state.len() != self.net.input_len() || t.next_state.len() != self.net.input_len() {
            return Err(Error::ShapeMismatch("transition does not match network input".into()));
        }
        self.replay.push(t);
        let Some(batch) = self.replay.sample(self.cfg.batch_size, &mut self.rng) else {
            return Ok(None);
        };
        let loss = train_step(&mut self.net, &self.target, &mut self.adam, &batch, self.cfg.gamma)?;
        self.train_steps += 1;
        if self.train_steps.is_multiple_of(self.cfg.target_sync_every) {
            sync_target(&self.net, &mut self.target)?;
        }
        Ok(Some(loss))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_transition(rng: &mut ChaCha8Rng, width: usize, n_actions: usize, terminal: bool) -> Transition {
        let v = |rng: &mut ChaCha8Rng| DqnState { values: (0..width).map(|_| rng.random_range(-1.0..1.0)).collect() };
        Transition {
            state: v(rng),
            action: ActionIndex::from_zero_based(rng.random_range(0..n_actions)),
            reward: rng.random_range(-2.0..2.0),
            next_state: v(rng),
            terminal,
        }
    }

    #[test]
    fn state_lengths_and_layout() {
        let gains3 = vec![vec![0.0; 3]; 8];
        let ones3: Vec<BetaVector> = (0..3).map(|i| BetaVector::all_ones(3, i)).collect();
        let s = build_state(&ones3, &gains3, 1).unwrap();
        assert_eq!(s.len(), 33);
        assert!(s.values()[..9].iter().all(|&v| v == 1.0));
        assert!(s.values()[9..].iter().all(|&v| v == 0.0));

        let gains6 = vec![vec![0.5; 6]; 64];
        let ones6: Vec<BetaVector> = (0..6).map(|i| BetaVector::all_ones(6, i)).collect();
        assert_eq!(build_state(&ones6, &gains6, 0).unwrap().len(), 420);
    }

    #[test]
    fn state_puts_own_weights_first_then_others_ascending() {
        let betas = vec![
            BetaVector::new(vec![true, false, false], 0).unwrap(),
            BetaVector::new(vec![false, true, false], 1).unwrap(),
            BetaVector::new(vec![false, false, true], 2).unwrap(),
        ];
        let gains: Vec<Vec<f64>> = (0..8).map(|c| vec![c as f64, 0.0, 0.0]).collect();
        let s = build_state(&betas, &gains, 2).unwrap();
        let head: Vec<f64> = s.values()[..9].to_vec();
        assert_eq!(head, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.values()[9], 0.0);
        assert_eq!(s.values()[9 + 3 * 7], 7.0);
        assert!(build_state(&betas, &gains[..7], 0).is_err());
    }

    #[test]
    fn gain_features_are_log_snr() {
        let f = gain_features(&[vec![0.0, 9.0, 99.0]], 1.0);
        assert_eq!(f[0][0], 0.0);
        assert!((f[0][1] - 1.0).abs() < 1e-15);
        assert!((f[0][2] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn greedy_selection_is_deterministic_with_low_index_ties() {
        let mut net = QNetwork::zeros(&[2, 4]).unwrap();
        net.layers_mut()[0].bias = vec![0.0, 3.0, 3.0, 1.0];
        let s = DqnState { values: vec![0.0, 0.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(select_action(&net, &s, 0.0, &mut rng).unwrap().value(), 2);
        }
        assert_eq!(argmax(&[1.0, 1.0]), 0);
        assert!(select_action(&net, &s, 1.5, &mut rng).is_err());
    }

    #[test]
    fn uniform_exploration_passes_chi_square() {
        let net = QNetwork::zeros(&[2, 8]).unwrap();
        let s = DqnState { values: vec![0.0, 0.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws = 100_000;
        let mut hist = [0usize; 8];
        for _ in 0..draws {
            hist[select_action(&net, &s, 1.0, &mut rng).unwrap().zero_based()] += 1;
        }
        let expect = draws as f64 / 8.0;
        let chi2: f64 = hist.iter().map(|&h| (h as f64 - expect).powi(2) / expect).sum();
        // 7 degrees of freedom, 0.999 quantile
        assert!(chi2 < 24.32, "chi2 = {chi2}");
    }

    #[test]
    fn replay_ring_and_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rb = ReplayBuffer::new(3);
        assert!(rb.sample(1, &mut rng).is_none());
        for k in 0..5 {
            let mut t = toy_transition(&mut rng, 2, 2, false);
            t.reward = k as f64;
            rb.push(t);
        }
        assert_eq!(rb.len(), 3);
        let s = rb.sample(3, &mut rng).unwrap();
        assert!(s.iter().all(|t| t.reward >= 2.0));
        assert!(rb.sample(4, &mut rng).is_none());
    }

    #[test]
    fn zero_problem_has_zero_loss_and_no_update() {
        let mut net = QNetwork::zeros(&[3, 4, 2]).unwrap();
        let target = net.clone();
        let mut adam = Adam::new(&net, 0.003);
        let t = Transition {
            state: DqnState { values: vec![1.0, 2.0, 3.0] },
            action: ActionIndex::from_zero_based(1),
            reward: 0.0,
            next_state: DqnState { values: vec![3.0, 2.0, 1.0] },
            terminal: false,
        };
        let before = net.clone();
        let loss = train_step(&mut net, &target, &mut adam, &[&t], 0.0).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(net, before);
    }

    /// Loss as a function of the online parameters only.
    fn loss_of(net: &QNetwork, target: &QNetwork, batch: &[&Transition], gamma: f64) -> f64 {
        td_loss_and_gradients(net, target, batch, gamma).unwrap().0
    }

    fn param_mut(n: &mut QNetwork, layer: usize, which: usize, k: usize) -> &mut f64 {
        let d = &mut n.layers_mut()[layer];
        if which == 0 {
            &mut d.weights[k]
        } else {
            &mut d.bias[k]
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut net = QNetwork::he_uniform(&[4, 3, 3, 2], &mut rng).unwrap();
        // nonzero biases keep pre-activations off the ReLU kink
        for layer in net.layers_mut() {
            for b in &mut layer.bias {
                *b = rng.random_range(0.1..0.5);
            }
        }
        let target = QNetwork::he_uniform(&[4, 3, 3, 2], &mut rng).unwrap();
        let ts: Vec<Transition> = (0..3).map(|k| toy_transition(&mut rng, 4, 2, k == 2)).collect();
        let batch: Vec<&Transition> = ts.iter().collect();
        let (_, grads) = td_loss_and_gradients(&net, &target, &batch, 0.99).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for (l, gl) in grads.layers.iter().enumerate() {
            for (which, g) in [(0, &gl.weights), (1, &gl.bias)] {
                for (k, &analytic) in g.iter().enumerate() {
                    let mut plus = net.clone();
                    let mut minus = net.clone();
                    *param_mut(&mut plus, l, which, k) += h;
                    *param_mut(&mut minus, l, which, k) -= h;
                    let numeric = (loss_of(&plus, &target, &batch, 0.99) - loss_of(&minus, &target, &batch, 0.99)) / (2.0 * h);
                    let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
                    worst = worst.max(rel);
                }
            }
        }
        assert!(worst <= 1e-5, "worst relative error {worst}");
    }

    #[test]
    fn repeated_training_on_one_transition_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut net = QNetwork::he_uniform(&[4, 8, 8, 2], &mut rng).unwrap();
        let target = net.clone();
        let mut adam = Adam::new(&net, 0.003);
        let t = toy_transition(&mut rng, 4, 2, true);
        let mut losses = Vec::new();
        for _ in 0..2000 {
            losses.push(train_step(&mut net, &target, &mut adam, &[&t], 0.99).unwrap());
        }
        assert!(losses.last().unwrap() < &1e-8, "final loss {}", losses.last().unwrap());
        let checkpoints: Vec<f64> = losses.iter().step_by(100).copied().collect();
        assert!(checkpoints.windows(2).all(|w| w[1] <= w[0]), "{checkpoints:?}");
    }

    #[test]
    fn sync_makes_outputs_identical_then_training_diverges_them() {
        let mut agent = DqnAgent::new(
            2,
            AgentConfig { hidden: vec![8, 8], batch_size: 2, replay_capacity: 16, target_sync_every: 1000, ..Default::default() },
            3,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = DqnState { values: (0..12).map(|_| rng.random()).collect() };
        sync_target(&agent.net.clone(), &mut agent.target).unwrap();
        assert_eq!(q_forward(&agent.net, &s).unwrap(), q_forward(&agent.target, &s).unwrap());
        let frozen = agent.target.clone();
        for _ in 0..5 {
            agent.observe(toy_transition(&mut rng, 12, 4, false)).unwrap();
            // no sync yet: target constant between syncs
            assert_eq!(agent.target, frozen);
        }
        assert_ne!(agent.net, agent.target);
    }

    #[test]
    fn periodic_sync_fires_on_schedule() {
        let mut agent = DqnAgent::new(
            2,
            AgentConfig { hidden: vec![4], batch_size: 1, replay_capacity: 8, target_sync_every: 3, ..Default::default() },
            1,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for step in 1..=7u64 {
            agent.observe(toy_transition(&mut rng, 12, 4, false)).unwrap();
            assert_eq!(agent.train_steps(), step);
            assert_eq!(agent.net == agent.target, step % 3 == 0);
        }
    }

    #[test]
    fn non_finite_loss_is_a_training_fault() {
        let mut net = QNetwork::zeros(&[2, 2]).unwrap();
        let target = net.clone();
        let mut adam = Adam::new(&net, 0.003);
        let t = Transition {
            state: DqnState { values: vec![0.0, 0.0] },
            action: ActionIndex::from_zero_based(0),
            reward: f64::INFINITY,
            next_state: DqnState { values: vec![0.0, 0.0] },
            terminal: true,
        };
        assert!(matches!(train_step(&mut net, &target, &mut adam, &[&t], 0.9), Err(Error::TrainingFault { .. })));
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = AgentConfig::default();
        assert_eq!(cfg.epsilon_at(0, 1000), 1.0);
        assert!((cfg.epsilon_at(150, 1000) - 0.525).abs() < 1e-12);
        assert_eq!(cfg.epsilon_at(300, 1000), 0.05);
        assert_eq!(cfg.epsilon_at(999, 1000), 0.05);
        assert_eq!(cfg.widths(4), vec![80, 512, 512, 256, 256, 128, 128, 16]);
        assert_eq!(cfg.widths(4).len() - 1, 7);
    }
}
