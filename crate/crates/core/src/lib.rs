//! Distributed DQN-driven weight selection for multicell MISO downlink
//! beamforming.
//!
//! Each base station builds its beamformer in closed form from a binary
//! weight vector over the users it serves or interferes with. A single
//! shared deep Q-network picks those weights, one base station per slot in
//! round-robin order, so only `N_C` bits cross the backhaul per slot.
//!
//! Module map:
//!
//! * [`cxla`]: small dense complex linear algebra
//! * [`netmodel`]: geometry, pathloss, noise and the AR(1) fading process
//! * [`beamform`]: weight encoding, beamformer construction, SINR and rates
//! * [`agent`]: the Q-network, replay buffer and training step
//! * [`protocol`]: the round-robin episode loop and backhaul accounting
//! * [`baselines`]: Max-SLNR, Beta-random and the genie oracles
//! * [`experiment`]: configuration and the CLI command implementations

pub mod agent;
pub mod baselines;
pub mod beamform;
pub mod cxla;
pub mod error;
pub mod experiment;
pub mod netmodel;
pub mod par;
pub mod protocol;
pub mod seed;

pub use error::{Error, Result};
