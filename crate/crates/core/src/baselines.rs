//! Reference policies and genie oracles.
//!
//! [`MaxSlnr`] and [`BetaRandom`] are distributed policies that ignore or
//! randomize the weights. [`GreedyBestResponse`] and
//! [`joint_exhaustive_oracle`] read the full channel tensor and exist only
//! as upper references.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beamform::{
    candidate_beams, decode_action, design_beamformer, encode_action, sum_rate, ActionIndex, BeamVector, BetaVector,
};
use crate::error::{Error, Result};
use crate::netmodel::ChannelTensor;
use crate::par::{self, Execution};
use crate::protocol::{DecisionContext, Policy};

/// Largest joint search space the oracle accepts.
pub const JOINT_ORACLE_BOUND: u128 = 1 << 20;

pub fn max_slnr_policy(n_cells: usize) -> ActionIndex {
    ActionIndex::all_ones(n_cells)
}

pub fn beta_random_policy<R: Rng>(n_cells: usize, rng: &mut R) -> ActionIndex {
    ActionIndex::from_zero_based(rng.random_range(0..1usize << n_cells))
}

/// Every BS keeps the all-ones weights.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxSlnr;

impl Policy for MaxSlnr {
    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<ActionIndex> {
        Ok(max_slnr_policy(ctx.betas.len()))
    }
}

/// The acting BS redraws its weights uniformly each slot.
#[derive(Debug, Clone)]
pub struct BetaRandom {
    rng: ChaCha8Rng,
}

impl BetaRandom {
    pub fn new(seed: u64) -> Self {
        BetaRandom { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Policy for BetaRandom {
    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<ActionIndex> {
        Ok(beta_random_policy(ctx.betas.len(), &mut self.rng))
    }
}

/// Best single-BS deviation: every action of `agent` with the other weights
/// held fixed, scored by the resulting sum-rate. On ties the agent keeps its
/// current weights if they are among the maximizers, otherwise the lowest
/// index wins.
pub fn greedy_best_response(
    ch: &ChannelTensor,
    betas: &[BetaVector],
    agent: usize,
    n0: f64,
) -> Result<(ActionIndex, f64)> {
    let mut beams: Vec<BeamVector> =
        betas.iter().map(|b| design_beamformer(b, ch.row(b.owner()), n0)).collect::<Result<_>>()?;
    let rates: Vec<f64> = candidate_beams(ch.row(agent), agent, n0)?
        .into_iter()
        .map(|w| {
            beams[agent] = w;
            sum_rate(ch, &beams, n0)
        })
        .collect();
    let best = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let incumbent = encode_action(&betas[agent]).zero_based();
    let pick = if rates[incumbent] == best { incumbent } else { rates.iter().position(|&r| r == best).expect("non-empty") };
    Ok((ActionIndex::from_zero_based(pick), best))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyBestResponse;

impl Policy for GreedyBestResponse {
    fn act(&mut self, ctx: &DecisionContext<'_>) -> Result<ActionIndex> {
        Ok(greedy_best_response(ctx.env.channels(), ctx.betas, ctx.agent, ctx.env.n0)?.0)
    }
}

/// Round-robin best responses on a frozen channel from the all-ones start
/// until `N_C` consecutive agents keep their weights, or `max_rounds` full
/// rotations pass.
pub fn converged_greedy(ch: &ChannelTensor, n0: f64, max_rounds: usize) -> Result<(Vec<BetaVector>, f64)> {
    let n = ch.n_cells();
    let mut betas: Vec<BetaVector> = (0..n).map(|i| BetaVector::all_ones(n, i)).collect();
    let beams: Vec<BeamVector> = betas.iter().map(|b| design_beamformer(b, ch.row(b.owner()), n0)).collect::<Result<_>>()?;
    let mut rate = sum_rate(ch, &beams, n0);
    let mut unchanged = 0;
    for step in 0..max_rounds * n {
        let agent = (step + 1) % n;
        let (a, r) = greedy_best_response(ch, &betas, agent, n0)?;
        let next = decode_action(a, n, agent)?;
        if next == betas[agent] {
            unchanged += 1;
        } else {
            unchanged = 0;
            betas[agent] = next;
            rate = r;
        }
        if unchanged >= n {
            break;
        }
    }
    Ok((betas, rate))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointOptimum {
    pub betas: Vec<BetaVector>,
    pub sum_rate: f64,
}

/// Brute force over every joint weight assignment.
///
/// Assignments are ordered lexicographically by `(a_0, …, a_{N_C-1})` and
/// the first maximizer is returned.
pub fn joint_exhaustive_oracle(ch: &ChannelTensor, n0: f64, exec: Execution) -> Result<JointOptimum> {
    let n = ch.n_cells();
    let per_cell = 1u128 << n;
    let total = per_cell.checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > JOINT_ORACLE_BOUND {
        return Err(Error::TooLarge { count: total, bound: JOINT_ORACLE_BOUND });
    }
    let total = total as usize;
    let per_cell = per_cell as usize;
    let beams: Vec<Vec<BeamVector>> = (0..n).map(|i| candidate_beams(ch.row(i), i, n0)).collect::<Result<_>>()?;
    let digits = |mut m: usize| -> Vec<usize> {
        let mut d = vec![0; n];
        for k in (0..n).rev() {
            d[k] = m % per_cell;
            m /= per_cell;
        }
        d
    };

    let block = 4096.min(total);
    let n_blocks = total.div_ceil(block);
    let bests = par::map_indexed(exec, n_blocks, |b| {
        let mut chosen = Vec::with_capacity(n);
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for m in b * block..((b + 1) * block).min(total) {
            chosen.clear();
            chosen.extend(digits(m).iter().enumerate().map(|(i, &a)| beams[i][a].clone()));
            let r = sum_rate(ch, &chosen, n0);
            if r > best.1 {
                best = (m, r);
            }
        }
        best
    });
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for b in bests {
        if b.1 > best.1 {
            best = b;
        }
    }
    let betas = digits(best.0)
        .iter()
        .enumerate()
        .map(|(i, &a)| decode_action(ActionIndex::from_zero_based(a), n, i))
        .collect::<Result<_>>()?;
    Ok(JointOptimum { betas, sum_rate: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cxla::{Complex64, ComplexVector};
    use crate::netmodel::{generate_geometry, init_channels, NetworkConfig};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Each BS's channel to its own user is orthogonal to its channels to
    /// every other user.
    fn orthogonal_two_cell() -> ChannelTensor {
        let v = |a: f64, b: f64| ComplexVector::new(vec![c(a), c(b)]).unwrap();
        ChannelTensor::from_vectors(vec![vec![v(1.0, 0.0), v(0.0, 0.5)], vec![v(0.5, 0.0), v(0.0, 1.0)]]).unwrap()
    }

    fn random_tensor(n_cells: usize, n_tx: usize, seed: u64) -> (ChannelTensor, f64) {
        let cfg = NetworkConfig { n_cells, n_tx, ..Default::default() };
        let g = generate_geometry(&cfg, seed);
        (init_channels(&g, &cfg, seed).unwrap(), cfg.noise_power_w())
    }

    #[test]
    fn max_slnr_is_all_ones() {
        assert_eq!(max_slnr_policy(3).value(), 8);
        let (ch, n0) = random_tensor(3, 2, 1);
        let w = design_beamformer(&decode_action(max_slnr_policy(3), 3, 1).unwrap(), ch.row(1), n0).unwrap();
        let full = design_beamformer(&BetaVector::all_ones(3, 1), ch.row(1), n0).unwrap();
        assert_eq!(w, full);
    }

    #[test]
    fn beta_random_is_uniform_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        let mut hist = [0usize; 16];
        for _ in 0..draws {
            hist[beta_random_policy(4, &mut rng).zero_based()] += 1;
        }
        let e = draws as f64 / 16.0;
        let chi2: f64 = hist.iter().map(|&h| (h as f64 - e).powi(2) / e).sum();
        // 15 degrees of freedom, 0.999 quantile
        assert!(chi2 < 37.70, "chi2 = {chi2}");
        let a: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..20).map(|_| beta_random_policy(4, &mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = ChaCha8Rng::seed_from_u64(9);
            (0..20).map(|_| beta_random_policy(4, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn orthogonal_channels_keep_all_ones() {
        let ch = orthogonal_two_cell();
        let n0 = 0.1;
        let betas: Vec<BetaVector> = (0..2).map(|i| BetaVector::all_ones(2, i)).collect();
        for agent in 0..2 {
            let (a, _) = greedy_best_response(&ch, &betas, agent, n0).unwrap();
            assert_eq!(a, ActionIndex::all_ones(2));
        }
        let opt = joint_exhaustive_oracle(&ch, n0, Execution::Sequential).unwrap();
        let ones: Vec<BeamVector> = betas.iter().map(|b| design_beamformer(b, ch.row(b.owner()), n0).unwrap()).collect();
        assert_eq!(sum_rate(&ch, &ones, n0), opt.sum_rate);
        // interference-free: each user gets its full matched-filter SNR
        let expect = 2.0 * (1.0f64 + 1.0 / n0).log2();
        assert!((opt.sum_rate - expect).abs() < 1e-12);
    }

    #[test]
    fn greedy_never_loses_to_staying_put() {
        for seed in 0..30 {
            let (ch, n0) = random_tensor(3, 2, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let betas: Vec<BetaVector> = (0..3)
                .map(|i| decode_action(beta_random_policy(3, &mut rng), 3, i).unwrap())
                .collect();
            let now: Vec<BeamVector> = betas.iter().map(|b| design_beamformer(b, ch.row(b.owner()), n0).unwrap()).collect();
            let (_, r) = greedy_best_response(&ch, &betas, (seed % 3) as usize, n0).unwrap();
            assert!(r >= sum_rate(&ch, &now, n0));
        }
    }

    #[test]
    fn single_cell_greedy_matches_joint_and_picks_mrt() {
        for seed in 0..5 {
            let (ch, n0) = random_tensor(1, 3, seed);
            let opt = joint_exhaustive_oracle(&ch, n0, Execution::Sequential).unwrap();
            assert_eq!(opt.betas, vec![BetaVector::all_ones(1, 0)]);
            let (a, r) = greedy_best_response(&ch, &[BetaVector::zeros(1, 0)], 0, n0).unwrap();
            assert_eq!(a, encode_action(&opt.betas[0]));
            assert_eq!(r, opt.sum_rate);
        }
    }

    #[test]
    fn oracle_sandwich_on_random_instances() {
        for seed in 0..10 {
            let (ch, n0) = random_tensor(3, 2, 100 + seed);
            let opt = joint_exhaustive_oracle(&ch, n0, Execution::Sequential).unwrap();
            let (_, greedy) = converged_greedy(&ch, n0, 20).unwrap();
            let ones: Vec<BetaVector> = (0..3).map(|i| BetaVector::all_ones(3, i)).collect();
            let beams: Vec<BeamVector> = ones.iter().map(|b| design_beamformer(b, ch.row(b.owner()), n0).unwrap()).collect();
            let max_slnr = sum_rate(&ch, &beams, n0);
            assert!(opt.sum_rate >= greedy && greedy >= max_slnr, "{} {} {}", opt.sum_rate, greedy, max_slnr);
        }
    }

    #[test]
    fn oracle_refuses_oversized_instances_and_is_execution_independent() {
        let (ch, n0) = random_tensor(5, 2, 0);
        assert!(matches!(
            joint_exhaustive_oracle(&ch, n0, Execution::Sequential),
            Err(Error::TooLarge { count, bound }) if count == 1 << 25 && bound == 1 << 20
        ));
        let (ch, n0) = random_tensor(3, 2, 7);
        assert_eq!(
            joint_exhaustive_oracle(&ch, n0, Execution::Sequential).unwrap(),
            joint_exhaustive_oracle(&ch, n0, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn oracle_ties_resolve_to_the_smallest_assignment() {
        // BS 0 has no channel to user 1 and its own channel lies on the first
        // axis, so its codes 1, 2 and 3 all yield the beam e1
        let v = |a: f64, b: f64| ComplexVector::new(vec![c(a), c(b)]).unwrap();
        let ch = ChannelTensor::from_vectors(vec![vec![v(1.0, 0.0), ComplexVector::zeros(2)], vec![v(0.3, 0.3), v(0.0, 1.0)]])
            .unwrap();
        let beams = candidate_beams(ch.row(0), 0, 0.1).unwrap();
        assert!(beams[1] == beams[2] && beams[2] == beams[3]);
        let opt = joint_exhaustive_oracle(&ch, 0.1, Execution::Sequential).unwrap();
        assert_eq!(encode_action(&opt.betas[0]).zero_based(), 1);
    }
}
