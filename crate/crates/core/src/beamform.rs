//! Binary weight vectors, the three-case beamformer construction, the
//! generalized WSLNR objective, SINR and sum-rate.

use num_complex::Complex64;

use crate::cxla::{self, ComplexMatrix, ComplexVector};
use crate::error::{contract, Result};
use crate::netmodel::{ChannelTensor, LocalCsi};

/// One BS's binary weights `β_{i·}`: entry `j` says whether the channel to
/// user `j` enters the beamformer objective.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BetaVector {
    bits: Vec<bool>,
    owner: usize,
}

impl BetaVector {
    pub fn new(bits: Vec<bool>, owner: usize) -> Result<Self> {
        if owner >= bits.len() {
            return Err(contract(format!("owner {owner} out of range for {} cells", bits.len())));
        }
        Ok(BetaVector { bits, owner })
    }

    /// The Max-SLNR weights: every entry set.
    pub fn all_ones(n_cells: usize, owner: usize) -> Self {
        BetaVector { bits: vec![true; n_cells], owner }
    }

    pub fn zeros(n_cells: usize, owner: usize) -> Self {
        BetaVector { bits: vec![false; n_cells], owner }
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, j: usize) -> bool {
        self.bits[j]
    }

    /// `β_{ii}`.
    pub fn serves_own_user(&self) -> bool {
        self.bits[self.owner]
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    /// Entries as `0.0` / `1.0`.
    pub fn as_reals(&self) -> impl Iterator<Item = f64> + '_ {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 })
    }
}

/// An action in `{1, …, 2^{N_C}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionIndex(u32);

impl ActionIndex {
    pub fn new(value: u32, n_cells: usize) -> Result<Self> {
        let max = 1u32 << n_cells;
        if value == 0 || value > max {
            return Err(contract(format!("action {value} outside 1..={max}")));
        }
        Ok(ActionIndex(value))
    }

    /// Action from a 0-based position in the action list (Q-network output).
    pub fn from_zero_based(k: usize) -> Self {
        ActionIndex(k as u32 + 1)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn zero_based(self) -> usize {
        self.0 as usize - 1
    }

    /// The all-ones action `2^{N_C}`.
    pub fn all_ones(n_cells: usize) -> Self {
        ActionIndex(1 << n_cells)
    }
}

/// Bits of `a - 1`, least significant bit first: bit `j` is `β_{ij}`.
pub fn decode_action(a: ActionIndex, n_cells: usize, owner: usize) -> Result<BetaVector> {
    ActionIndex::new(a.0, n_cells)?;
    let code = a.0 - 1;
    BetaVector::new((0..n_cells).map(|j| code >> j & 1 == 1).collect(), owner)
}

pub fn encode_action(beta: &BetaVector) -> ActionIndex {
    let code = beta.bits.iter().enumerate().fold(0u32, |acc, (j, &b)| acc | (u32::from(b) << j));
    ActionIndex(code + 1)
}

/// A beamformer with `‖w‖² = 1`, or exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector(ComplexVector);

impl BeamVector {
    pub fn zero(n_tx: usize) -> Self {
        BeamVector(ComplexVector::zeros(n_tx))
    }

    /// Wraps a unit-norm or zero vector.
    pub fn new(w: ComplexVector) -> Result<Self> {
        let p = w.norm_sqr();
        if !(w.is_zero() || (p - 1.0).abs() <= 1e-10) {
            return Err(contract(format!("beamformer must be unit-norm or zero, got ‖w‖² = {p}")));
        }
        Ok(BeamVector(w))
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.0
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// `|h^H w|²`.
pub fn gain(h: &[Complex64], w: &BeamVector) -> f64 {
    if w.is_zero() {
        return 0.0;
    }
    cxla::inner(h, w.as_slice()).norm_sqr()
}

/// Builds BS `i`'s beamformer from its weights and its own outgoing
/// channels only.
///
/// * `β_ii = 1`: maximize `|h_ii^H w|² / (w^H B w)` with
///   `B = Σ_{j≠i} β_ij h_ij h_ij^H + N0 I`.
/// * `β_ii = 0`, `β ≠ 0`: minimize the weighted leakage `‖G w‖²`.
/// * `β = 0`: `w = 0`.
pub fn design_beamformer(beta: &BetaVector, csi: LocalCsi<'_>, n0: f64) -> Result<BeamVector> {
    let n = csi.n_cells();
    let nt = csi.n_tx();
    if beta.len() != n {
        return Err(contract(format!("beta has {} entries for {n} cells", beta.len())));
    }
    if !(n0 > 0.0) {
        return Err(contract(format!("noise power must be positive, got {n0}")));
    }
    let i = beta.owner();
    if beta.is_zero() {
        return Ok(BeamVector::zero(nt));
    }
    let w = if beta.serves_own_user() {
        let mut b = ComplexMatrix::zeros(nt, nt);
        for j in (0..n).filter(|&j| j != i && beta.get(j)) {
            b.add_outer(1.0, csi.to_user(j));
        }
        b.add_identity(n0);
        cxla::max_gen_rayleigh_rank1(csi.to_user(i), &b)?
    } else {
        let zero = vec![Complex64::new(0.0, 0.0); nt];
        let rows: Vec<&[Complex64]> =
            (0..n).map(|j| if beta.get(j) { csi.to_user(j) } else { zero.as_slice() }).collect();
        cxla::min_norm_direction(&ComplexMatrix::from_adjoint_rows(&rows, nt))?
    };
    Ok(BeamVector(w))
}

/// The two-branch generalized WSLNR of BS `i` for beamformer `w`.
pub fn chi(beta: &BetaVector, csi: LocalCsi<'_>, w: &BeamVector, n0: f64) -> f64 {
    let i = beta.owner();
    let leak: f64 = (0..csi.n_cells())
        .filter(|&j| j != i && beta.get(j))
        .map(|j| gain(csi.to_user(j), w))
        .sum();
    let num = if beta.serves_own_user() { gain(csi.to_user(i), w) } else { 1.0 };
    num / (leak + n0)
}

/// SINR of user `i`.
pub fn sinr(ch: &ChannelTensor, beams: &[BeamVector], n0: f64, i: usize) -> f64 {
    let signal = gain(ch.h(i, i), &beams[i]);
    let interference: f64 = (0..ch.n_cells()).filter(|&k| k != i).map(|k| gain(ch.h(k, i), &beams[k])).sum();
    signal / (interference + n0)
}

/// Per-user rates `log2(1 + γ_i)` in bits/s/Hz.
pub fn cell_rates(ch: &ChannelTensor, beams: &[BeamVector], n0: f64) -> Vec<f64> {
    (0..ch.n_cells()).map(|i| (1.0 + sinr(ch, beams, n0, i)).log2()).collect()
}

/// `Σ_i log2(1 + γ_i)`.
pub fn sum_rate(ch: &ChannelTensor, beams: &[BeamVector], n0: f64) -> f64 {
    cell_rates(ch, beams, n0).iter().sum()
}

/// Beamformers of every BS for the given weights.
pub fn design_all(ch: &ChannelTensor, betas: &[BetaVector], n0: f64) -> Result<Vec<BeamVector>> {
    betas.iter().map(|b| design_beamformer(b, ch.row(b.owner()), n0)).collect()
}

/// The beamformer for every action of BS `owner`, in action order.
pub fn candidate_beams(csi: LocalCsi<'_>, owner: usize, n0: f64) -> Result<Vec<BeamVector>> {
    let n = csi.n_cells();
    (0..1usize << n)
        .map(|k| {
            let beta = decode_action(ActionIndex::from_zero_based(k), n, owner)?;
            design_beamformer(&beta, csi, n0)
        })
        .collect()
}

/// `g^{[c]}_j = |h_{ij}^H w^{[c]}|²` for every action `c` (outer index) and
/// user `j` (inner index).
pub fn candidate_gains(csi: LocalCsi<'_>, owner: usize, n0: f64) -> Result<Vec<Vec<f64>>> {
    Ok(gains_of(csi, &candidate_beams(csi, owner, n0)?))
}

pub fn gains_of(csi: LocalCsi<'_>, beams: &[BeamVector]) -> Vec<Vec<f64>> {
    beams.iter().map(|w| (0..csi.n_cells()).map(|j| gain(csi.to_user(j), w)).collect()).collect()
}
