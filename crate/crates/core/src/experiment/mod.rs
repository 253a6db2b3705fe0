//! Configuration and the command implementations behind the `bfdqn` binary.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_eval, cmd_info_exchange, cmd_oracle_compare, cmd_sweep_power, cmd_train, evaluate, load_checkpoint,
    load_checkpoint_for, save_checkpoint, EvalCurves, PolicyKind,
};
pub use config::ExperimentConfig;
