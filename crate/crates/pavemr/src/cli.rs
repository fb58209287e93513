//! Command-line front end. Exit codes: 0 success, 1 invalid input or usage,
//! 2 runtime abort.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use pavemr_core::dataprep::ImputationConfig;
use pavemr_core::envmodel::SurrogateTrainingConfig;

use crate::checkpoint::{Algo, Checkpoint};
use crate::commands::{self, TrainStart};
use crate::config::{CompareConfig, RunConfig, SensitivityConfig};
use crate::error::{Error, Result};
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "pavemr", version, about = "Pavement maintenance planning with reinforcement learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repair and calibrate a history CSV and build surrogate training pairs.
    Calibrate {
        input: PathBuf,
        /// Output directory.
        out: PathBuf,
        /// Vocabulary file; the built-in codes when absent.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Imputation policies (TOML).
        #[arg(long)]
        impute: Option<PathBuf>,
        /// Year from which action dates are measured.
        #[arg(long, default_value_t = SurrogateTrainingConfig::default().epoch_year)]
        epoch_year: i32,
    },
    /// Fit the surrogate deterioration model on a `calibrate` output directory.
    TrainEnv {
        pairs: PathBuf,
        model: PathBuf,
        /// Surrogate training settings (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train a maintenance agent on the case study.
    TrainAgent {
        #[arg(long, value_enum)]
        algo: Option<Algo>,
        #[arg(long, required_unless_present = "resume")]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "resume")]
        seed: Option<u64>,
        /// Continue from a checkpoint; algorithm, seed and config come from it.
        #[arg(long, conflicts_with = "config")]
        resume: Option<PathBuf>,
        /// Write into this directory instead of a new timestamped one.
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// Greedy plans of a trained policy over the case-study fleet.
    Plan {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Traffic sensitivity of a trained policy.
    Sensitivity {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// PPO against DQN on matched environment-step budgets.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        run_dir: Option<PathBuf>,
    },
    /// Write the vocabulary, action catalog, placeholder costs and default configs.
    ExportData { dir: PathBuf },
}

fn run_dir(explicit: Option<PathBuf>, root: &std::path::Path, seed: u64) -> Result<PathBuf> {
    match explicit {
        Some(d) => {
            std::fs::create_dir_all(&d).map_err(|e| Error::write(&d, e))?;
            Ok(d)
        }
        None => commands::new_run_dir(root, seed),
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

/// Runs one parsed command and returns what to print on success.
pub fn execute(command: Command) -> Result<String> {
    match command {
        Command::Calibrate {
            input,
            out,
            vocab,
            impute,
            epoch_year,
        } => {
            let imputation = match impute {
                Some(p) => io::read_toml::<ImputationConfig>(&p)?,
                None => ImputationConfig::default(),
            };
            let summary = commands::calibrate(&input, &out, vocab.as_deref(), &imputation, epoch_year)?;
            Ok(json_line(&summary))
        }
        Command::TrainEnv { pairs, model, config } => {
            let cfg = match config {
                Some(p) => io::read_toml::<SurrogateTrainingConfig>(&p)?,
                None => SurrogateTrainingConfig::default(),
            };
            let fit = commands::train_env(&pairs, &model, &cfg)?;
            Ok(json_line(&fit))
        }
        Command::TrainAgent {
            algo,
            config,
            seed,
            resume,
            run_dir: explicit,
        } => {
            let start = match (resume, config) {
                (Some(path), _) => {
                    let ckpt = Checkpoint::load(&path)?;
                    if algo.is_some_and(|a| a != ckpt.agent.algo()) {
                        return Err(Error::Usage(format!("checkpoint was trained with {}", ckpt.agent.algo().name())));
                    }
                    if seed.is_some_and(|s| s != ckpt.seed) {
                        return Err(Error::Usage(format!("checkpoint was trained with seed {}", ckpt.seed)));
                    }
                    TrainStart::Resume(Box::new(ckpt))
                }
                (None, Some(path)) => TrainStart::Fresh {
                    algo: algo.ok_or_else(|| Error::Usage("--algo is required".into()))?,
                    seed: seed.ok_or_else(|| Error::Usage("--seed is required".into()))?,
                    config: RunConfig::load(&path)?,
                },
                (None, None) => return Err(Error::Usage("--config or --resume is required".into())),
            };
            let (root, seed) = match &start {
                TrainStart::Fresh { seed, config, .. } => (config.output_root.clone(), *seed),
                TrainStart::Resume(c) => (c.config.output_root.clone(), c.seed),
            };
            let dir = run_dir(explicit, &root, seed)?;
            let outcome = commands::train_agent(start, &dir)?;
            Ok(outcome.final_checkpoint.display().to_string())
        }
        Command::Plan { checkpoint, out } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            let report = commands::plan(&ckpt, &out)?;
            Ok(format!("mean final effcost {:e} over {} segments", report.mean_final_effcost(), report.plans.len()))
        }
        Command::Sensitivity { spec, run_dir: explicit } => {
            let cfg = SensitivityConfig::load(&spec)?;
            let ckpt = Checkpoint::load(&cfg.checkpoint)?;
            let dir = run_dir(explicit, &cfg.output_root, cfg.sensitivity.seed)?;
            commands::run_sensitivity(&cfg, &ckpt, &dir)?;
            Ok(dir.display().to_string())
        }
        Command::Compare { config, run_dir: explicit } => {
            let cfg = CompareConfig::load(&config)?;
            let seed = cfg.compare.seeds.first().copied().unwrap_or(0);
            let dir = run_dir(explicit, &cfg.output_root, seed)?;
            commands::run_compare(&cfg, &dir)?;
            Ok(dir.display().to_string())
        }
        Command::ExportData { dir } => {
            commands::export_data(&dir)?;
            Ok(dir.display().to_string())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
