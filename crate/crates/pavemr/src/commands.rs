//! The operations behind each subcommand, callable without the CLI.

use std::path::{Path, PathBuf};

use serde::Serialize;

use pavemr_core::agents::{
    train_dqn, train_ppo, ArgmaxPolicy, ChainMdp, DqnTrainer, Environment, Policy, PpoTrainer,
};
use pavemr_core::dataprep::{
    build_training_pairs, calibrate_dataset, impute_dataset, ImputationConfig, ImputeReport, Indicator,
};
use pavemr_core::domain::{build_action_catalog, Vocabulary};
use pavemr_core::envmodel::{train_surrogate, FitReport, MaintenanceEnv, SurrogateTrainingConfig};
use pavemr_core::neural::Mlp;
use pavemr_core::rewardlca::CostCatalog;
use pavemr_core::runner::{
    compare_agents, plan_report, scale_traffic, sensitivity, ComparisonReport, PlanReport, SensitivityRow,
};

use crate::catalog;
use crate::checkpoint::{AgentState, Algo, Checkpoint};
use crate::config::{CompareConfig, CompareTarget, Prepared, RunConfig, SensitivityConfig};
use crate::error::{Error, Result};
use crate::ingest;
use crate::io;
use crate::model;
use crate::report;
use crate::vocab;

/// Creates `<root>/<UTC timestamp>-seed<seed>`, adding a counter if that
/// directory already exists.
pub fn new_run_dir(root: &Path, seed: u64) -> Result<PathBuf> {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let base = format!("{stamp}-seed{seed}");
    let mut dir = root.join(&base);
    let mut n = 1;
    while dir.exists() {
        dir = root.join(format!("{base}-{n}"));
        n += 1;
    }
    std::fs::create_dir_all(&dir).map_err(|e| Error::write(&dir, e))?;
    Ok(dir)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrateSummary {
    pub segments: usize,
    pub snapshots: usize,
    pub actions: usize,
    pub imputation: ImputeReport,
    pub calibrated_values: usize,
    pub iri_pairs: usize,
    pub rd_pairs: usize,
    /// Segments with too few observations to form a pair.
    pub skipped_segments: Vec<String>,
    pub epoch_year: i32,
}

/// Ingests a history CSV and writes the repaired, calibrated dataset, the
/// change report, training pairs per indicator and their input ranges into
/// `out`.
pub fn calibrate(
    input: &Path,
    out: &Path,
    vocabulary: Option<&Path>,
    imputation: &ImputationConfig,
    epoch_year: i32,
) -> Result<CalibrateSummary> {
    let vocab = match vocabulary {
        Some(p) => vocab::load_vocabulary(p)?,
        None => Vocabulary::standard(),
    };
    let raw = ingest::load_history(input, &vocab)?;
    let (mut dataset, imputation) = impute_dataset(&raw, imputation)?;
    let changes = calibrate_dataset(&mut dataset);
    let iri = build_training_pairs(&dataset, Indicator::Iri, epoch_year)?;
    let rd = build_training_pairs(&dataset, Indicator::Rd, epoch_year)?;

    ingest::write_dataset(&out.join("dataset.csv"), &dataset, &vocab)?;
    ingest::write_changes(&out.join("changes.csv"), &changes)?;
    ingest::write_pairs(&out.join("pairs_iri.csv"), &iri.pairs)?;
    ingest::write_pairs(&out.join("pairs_rd.csv"), &rd.pairs)?;
    if !iri.pairs.is_empty() && !rd.pairs.is_empty() {
        io::write_json(
            &out.join("normalization.json"),
            &ingest::NormalizationFile::fit(&iri.pairs, &rd.pairs)?,
        )?;
    }
    let summary = CalibrateSummary {
        segments: dataset.segments.len(),
        snapshots: dataset.segments.iter().map(|s| s.snapshots.len()).sum(),
        actions: dataset.segments.iter().map(|s| s.actions.len()).sum(),
        imputation,
        calibrated_values: changes.len(),
        iri_pairs: iri.pairs.len(),
        rd_pairs: rd.pairs.len(),
        skipped_segments: iri.skipped,
        epoch_year,
    };
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Fits the surrogate pair on `pairs_iri.csv` and `pairs_rd.csv` in
/// `pairs_dir` and writes the model file.
pub fn train_env(pairs_dir: &Path, model_path: &Path, cfg: &SurrogateTrainingConfig) -> Result<FitReport> {
    let iri = ingest::load_pairs(&pairs_dir.join("pairs_iri.csv"))?;
    let rd = ingest::load_pairs(&pairs_dir.join("pairs_rd.csv"))?;
    let (pair, fit) = train_surrogate(&iri, &rd, cfg)?;
    model::save_surrogate(model_path, &pair)?;
    Ok(fit)
}

/// What to train: a fresh agent or the continuation of a checkpoint.
#[derive(Debug, Clone)]
pub enum TrainStart {
    Fresh { algo: Algo, seed: u64, config: RunConfig },
    Resume(Box<Checkpoint>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub final_checkpoint: PathBuf,
    pub log: PathBuf,
    pub checkpoint: Checkpoint,
}

fn advance(agent: &mut AgentState, envs: &mut [MaintenanceEnv]) -> pavemr_core::Result<()> {
    match agent {
        AgentState::Ppo(t) => t.iterate(envs).map(drop),
        AgentState::Dqn(t) => t.run_episode(&mut envs[0]).map(drop),
    }
}

fn write_log(path: &Path, agent: &AgentState) -> Result<()> {
    match agent {
        AgentState::Ppo(t) => report::write_ppo_log(path, t.log()),
        AgentState::Dqn(t) => report::write_dqn_log(path, t.log()),
    }
}

/// Trains into `dir`: `config.toml`, `checkpoints/<progress>.json` every
/// `checkpoint_every` units, `training_log.csv`, and on completion
/// `final.json` and `policy.mlp`.
pub fn train_agent(start: TrainStart, dir: &Path) -> Result<TrainOutcome> {
    let (mut ckpt, prepared) = match start {
        TrainStart::Fresh { algo, seed, config } => {
            let prepared = Prepared::new(config)?;
            let env = prepared.env()?;
            let (obs, actions) = (env.observation_len(), env.action_count());
            let cfg = &prepared.config;
            let agent = match algo {
                Algo::Ppo => AgentState::Ppo(PpoTrainer::new(cfg.ppo.clone(), obs, actions, seed)?),
                Algo::Dqn => AgentState::Dqn(DqnTrainer::new(cfg.dqn.clone(), obs, actions, seed)?),
            };
            let ckpt = Checkpoint::new(seed, cfg.clone(), prepared.costs.clone(), agent);
            (ckpt, prepared)
        }
        TrainStart::Resume(ckpt) => {
            let prepared = Prepared::with_costs(ckpt.config.clone(), ckpt.costs.clone())?;
            (*ckpt, prepared)
        }
    };
    io::write_toml(&dir.join("config.toml"), &ckpt.config)?;
    let log_path = dir.join("training_log.csv");
    let checkpoints = dir.join("checkpoints");
    let save_point = |ckpt: &Checkpoint| -> Result<PathBuf> {
        let path = checkpoints.join(format!("{:06}.json", ckpt.agent.progress()));
        ckpt.save(&path)?;
        write_log(&log_path, &ckpt.agent)?;
        Ok(path)
    };
    let mut last = save_point(&ckpt)?;

    let executors = match &ckpt.agent {
        AgentState::Ppo(t) => t.cfg.executors,
        AgentState::Dqn(_) => 1,
    };
    let mut envs: Vec<MaintenanceEnv> = (0..executors).map(|_| prepared.env()).collect::<pavemr_core::Result<_>>()?;
    let every = ckpt.config.checkpoint_every;
    while ckpt.agent.progress() < ckpt.agent.target() {
        if let Err(cause) = advance(&mut ckpt.agent, &mut envs) {
            write_log(&log_path, &ckpt.agent)?;
            return Err(Error::Aborted { cause, checkpoint: last });
        }
        let p = ckpt.agent.progress();
        if every > 0 && p % every == 0 && p < ckpt.agent.target() {
            last = save_point(&ckpt)?;
        }
    }
    ckpt.complete = true;
    let final_checkpoint = dir.join("final.json");
    ckpt.save(&final_checkpoint)?;
    write_log(&log_path, &ckpt.agent)?;
    model::save_mlp(&dir.join("policy.mlp"), ckpt.agent.acting_net())?;
    Ok(TrainOutcome {
        final_checkpoint,
        log: log_path,
        checkpoint: ckpt,
    })
}

/// Greedy plans of the checkpoint's policy over its case-study fleet,
/// written into `out`.
pub fn plan(checkpoint: &Checkpoint, out: &Path) -> Result<PlanReport> {
    let prepared = Prepared::with_costs(checkpoint.config.clone(), checkpoint.costs.clone())?;
    let mut env = prepared.env()?;
    let case = &prepared.config.case_study;
    let mut policy = ArgmaxPolicy(checkpoint.agent.acting_net());
    let report = plan_report(&mut policy, &mut env, &prepared.fleet, case.horizon_years)?;
    report::write_plan_report(out, &report, case.start_year)?;
    Ok(report)
}

/// Greedy policy that owns its network.
struct OwnedArgmax(Mlp);

impl Policy for OwnedArgmax {
    fn select(&mut self, observation: &[f64]) -> pavemr_core::Result<usize> {
        ArgmaxPolicy(&self.0).select(observation)
    }
}

fn retrain(
    algo: Algo,
    seed: u64,
    prepared: &Prepared,
    multiplier: f64,
) -> pavemr_core::Result<OwnedArgmax> {
    let fleet = scale_traffic(&prepared.fleet, multiplier);
    match algo {
        Algo::Ppo => {
            let make = |_| prepared.env_for(&fleet);
            Ok(OwnedArgmax(train_ppo(make, prepared.config.ppo.clone(), seed)?.policy))
        }
        Algo::Dqn => {
            let mut env = prepared.env_for(&fleet)?;
            Ok(OwnedArgmax(train_dqn(&mut env, prepared.config.dqn.clone(), seed)?.q_net))
        }
    }
}

/// Traffic sensitivity of the checkpoint's policy, written into `out`.
pub fn run_sensitivity(cfg: &SensitivityConfig, checkpoint: &Checkpoint, out: &Path) -> Result<Vec<SensitivityRow>> {
    let prepared = Prepared::with_costs(checkpoint.config.clone(), checkpoint.costs.clone())?;
    let mut env = prepared.env()?;
    let case = &prepared.config.case_study;
    let rows = if cfg.retrain {
        let (algo, seed) = (checkpoint.agent.algo(), checkpoint.seed);
        sensitivity(&cfg.sensitivity, case, &mut env, |m| retrain(algo, seed, &prepared, m))?
    } else {
        let net = checkpoint.agent.acting_net().clone();
        sensitivity(&cfg.sensitivity, case, &mut env, |_| Ok(OwnedArgmax(net.clone())))?
    };
    report::write_sensitivity(out, &rows, cfg.retrain)?;
    Ok(rows)
}

/// PPO against DQN on matched step budgets, written into `out`.
pub fn run_compare(cfg: &CompareConfig, out: &Path) -> Result<ComparisonReport> {
    let report = match cfg.target {
        CompareTarget::Chain => {
            let len = cfg.chain_episode_len;
            compare_agents(|| Ok(ChainMdp::new(len)), &cfg.compare)?
        }
        CompareTarget::CaseStudy => {
            let prepared = Prepared::new(cfg.run.clone())?;
            compare_agents(|| prepared.env(), &cfg.compare)?
        }
    };
    io::write_toml(&out.join("config.toml"), cfg)?;
    report::write_comparison(out, &report)?;
    Ok(report)
}

/// Writes the reference data files: vocabulary, action catalog, the
/// placeholder cost catalog and default configs.
pub fn export_data(dir: &Path) -> Result<()> {
    io::write_text(&dir.join("vocabulary.txt"), &vocab::render_vocabulary(&Vocabulary::standard()))?;
    catalog::write_action_catalog(&dir.join("actions.csv"), &build_action_catalog())?;
    let cfg = RunConfig::default();
    catalog::save_costs(
        &dir.join("costs.toml"),
        &CostCatalog::placeholder(cfg.case_study.segment_area_m2()),
        catalog::PLACEHOLDER_NOTE,
    )?;
    io::write_toml(&dir.join("run.toml"), &cfg)?;
    io::write_toml(&dir.join("compare.toml"), &CompareConfig::default())?;
    io::write_toml(&dir.join("surrogate.toml"), &SurrogateTrainingConfig::default())?;
    Ok(())
}
