use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bfdqn::experiment::{self, ExperimentConfig};
use bfdqn::par::Execution;
use bfdqn::Error;
use clap::{Args, Parser, Subcommand};

/// DQN-driven binary weight selection for multicell MISO beamforming.
#[derive(Parser, Debug)]
#[command(name = "bfdqn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Configuration file (`key = value` lines, `[section]` headers).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for evaluation; 1 runs sequentially.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Freeze the channels (fading correlation 1).
    #[arg(long)]
    static_channel: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train the shared Q-network.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a checkpoint against the baselines.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
    },
    /// Evaluate over the configured transmit powers.
    SweepPower {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
    },
    /// Cumulative backhaul bits of the proposed and IFU-selection schemes.
    InfoExchange {
        #[command(flatten)]
        common: Common,
        /// Number of slots; defaults to the configured episode length.
        #[arg(long, value_name = "T")]
        slots: Option<usize>,
    },
    /// Joint exhaustive oracle against greedy, Max-SLNR and an optional
    /// checkpoint.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
}

fn load_config(c: &Common) -> bfdqn::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    if c.static_channel {
        cfg.static_channel = true;
    }
    Ok(cfg)
}

fn execution(threads: Option<usize>) -> bfdqn::Result<Execution> {
    match threads {
        Some(0) => Err(Error::Config(vec!["--threads must be at least 1".into()])),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            configure_pool(n)?;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

#[cfg(feature = "parallel")]
fn configure_pool(n: usize) -> bfdqn::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_n: usize) -> bfdqn::Result<()> {
    log::warn!("built without the parallel feature; running sequentially");
    Ok(())
}

fn run(cli: Cli) -> bfdqn::Result<()> {
    match cli.command {
        Command::Train { common } => {
            let cfg = load_config(&common)?;
            execution(common.threads)?;
            let s = experiment::cmd_train(&cfg, &cfg.out_dir)?;
            println!("trained {} episodes ({} steps); checkpoint {}", s.episodes, s.train_steps, s.checkpoint.display());
        }
        Command::Eval { common, checkpoint } => {
            let cfg = load_config(&common)?;
            let exec = execution(common.threads)?;
            let net = experiment::load_checkpoint_for(&checkpoint, &cfg)?;
            let c = experiment::cmd_eval(&cfg, &net, &cfg.out_dir, exec)?;
            let t = cfg.network.n_cells.min(c.final_slot());
            for (p, r) in c.policies.iter().zip(&c.rates[t]) {
                println!("{:>12} per-cell rate at slot {t}: {r:.4}", p.name());
            }
        }
        Command::SweepPower { common, checkpoint } => {
            let cfg = load_config(&common)?;
            let exec = execution(common.threads)?;
            let net = experiment::load_checkpoint_for(&checkpoint, &cfg)?;
            let pts = experiment::cmd_sweep_power(&cfg, Some(&net), &cfg.out_dir, exec)?;
            println!("wrote {} power points to {}", pts.len(), cfg.out_dir.join("sweep_power.csv").display());
        }
        Command::InfoExchange { common, slots } => {
            let cfg = load_config(&common)?;
            let t = slots.unwrap_or_else(|| cfg.slots());
            let info = experiment::cmd_info_exchange(&cfg, t, &cfg.out_dir)?;
            let (_, p, f) = info.cumulative.last().copied().unwrap_or_default();
            println!("after {t} slots: proposed {p} bits, IFU-selection {f} bits");
        }
        Command::OracleCompare { common, checkpoint } => {
            let cfg = load_config(&common)?;
            let exec = execution(common.threads)?;
            let net = checkpoint.as_deref().map(|p: &Path| experiment::load_checkpoint_for(p, &cfg)).transpose()?;
            let rows = experiment::cmd_oracle_compare(&cfg, net.as_ref(), &cfg.out_dir, exec)?;
            println!("compared {} instances; {}", rows.len(), cfg.out_dir.join("oracle_compare.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace(['\n', '\t'], " ");
            eprintln!("error\tkind={}\tmessage={msg}", e.kind());
            ExitCode::from(2)
        }
    }
}
