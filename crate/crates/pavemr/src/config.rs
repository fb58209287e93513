//! TOML run configurations and the environments they describe.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pavemr_core::agents::{DqnConfig, PpoConfig};
use pavemr_core::domain::SegmentState;
use pavemr_core::envmodel::{EnvironmentConfig, EnvironmentMode, EpisodeSetup, InitialStateSampler, MaintenanceEnv, SurrogatePair};
use pavemr_core::rewardlca::{CostCatalog, RewardConfig};
use pavemr_core::runner::{case_study_ppo_config, generate_case_study, CaseStudyConfig, CompareSpec, SensitivitySpec, CASE_STUDY_REWARD_SCALE};

use crate::catalog;
use crate::error::{Error, Result};
use crate::io;
use crate::model;

/// Everything a training run needs besides the algorithm and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Directory under which run directories are created.
    pub output_root: PathBuf,
    /// Checkpoint period in PPO iterations or DQN episodes; 0 keeps only the
    /// initial and final checkpoints.
    pub checkpoint_every: u64,
    /// Seed of the case-study fleet, independent of the agent seed.
    pub case_seed: u64,
    /// Cost catalog file; the placeholder catalog when absent.
    pub costs: Option<PathBuf>,
    /// Surrogate model file, required in surrogate mode.
    pub surrogate_model: Option<PathBuf>,
    pub case_study: CaseStudyConfig,
    pub environment: EnvironmentConfig,
    pub reward: RewardConfig,
    pub ppo: PpoConfig,
    pub dqn: DqnConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_root: PathBuf::from("runs"),
            checkpoint_every: 100,
            case_seed: 0,
            costs: None,
            surrogate_model: None,
            case_study: CaseStudyConfig::default(),
            environment: EnvironmentConfig::default(),
            reward: RewardConfig::default(),
            ppo: case_study_ppo_config(),
            dqn: DqnConfig {
                reward_scale: CASE_STUDY_REWARD_SCALE,
                ..DqnConfig::default()
            },
        }
    }
}

/// Resolves `p` against `base` unless it is absolute.
fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

impl RunConfig {
    /// Loads a config; relative paths inside it are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = io::read_toml(path)?;
        cfg.resolve_paths(&config_dir(path));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        self.output_root = resolve(base, &self.output_root);
        self.costs = self.costs.as_deref().map(|p| resolve(base, p));
        self.surrogate_model = self.surrogate_model.as_deref().map(|p| resolve(base, p));
    }

    pub fn validate(&self) -> Result<()> {
        self.case_study.validate()?;
        self.environment.validate()?;
        self.reward.validate()?;
        self.ppo.validate()?;
        self.dqn.validate()?;
        if self.environment.horizon_years != self.case_study.horizon_years {
            return Err(Error::Usage(format!(
                "environment.horizon_years ({}) differs from case_study.horizon_years ({})",
                self.environment.horizon_years, self.case_study.horizon_years
            )));
        }
        if self.environment.mode == EnvironmentMode::Surrogate && self.surrogate_model.is_none() {
            return Err(Error::Usage("surrogate mode needs `surrogate_model`".into()));
        }
        Ok(())
    }

    pub fn load_costs(&self) -> Result<CostCatalog> {
        match &self.costs {
            Some(p) => catalog::load_costs(p),
            None => Ok(CostCatalog::placeholder(self.case_study.segment_area_m2())),
        }
    }

    pub fn load_surrogate(&self) -> Result<Option<SurrogatePair>> {
        match (&self.surrogate_model, self.environment.mode) {
            (Some(p), EnvironmentMode::Surrogate) => Ok(Some(model::load_surrogate(p)?)),
            _ => Ok(None),
        }
    }

    pub fn fleet(&self) -> Result<Vec<SegmentState>> {
        Ok(generate_case_study(&self.case_study, self.case_seed)?)
    }
}

/// A run config with its external files loaded, ready to build environments.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub costs: CostCatalog,
    pub surrogate: Option<SurrogatePair>,
    pub fleet: Vec<SegmentState>,
}

impl Prepared {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            costs: config.load_costs()?,
            surrogate: config.load_surrogate()?,
            fleet: config.fleet()?,
            config,
        })
    }

    /// Uses `costs` instead of reading the configured file.
    pub fn with_costs(config: RunConfig, costs: CostCatalog) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            costs,
            surrogate: config.load_surrogate()?,
            fleet: config.fleet()?,
            config,
        })
    }

    /// An environment whose episodes start from segments of `fleet`.
    pub fn env_for(&self, fleet: &[SegmentState]) -> pavemr_core::Result<MaintenanceEnv> {
        let mut setup = EpisodeSetup::new(
            self.config.environment.clone(),
            self.costs.clone(),
            InitialStateSampler::Fleet {
                segments: fleet.to_vec(),
            },
        );
        setup.reward = self.config.reward;
        MaintenanceEnv::new(setup, self.surrogate.clone())
    }

    pub fn env(&self) -> pavemr_core::Result<MaintenanceEnv> {
        self.env_for(&self.fleet)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareTarget {
    /// The two-state chain with a known optimum.
    Chain,
    /// The case-study environment described by `run`.
    CaseStudy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub output_root: PathBuf,
    pub target: CompareTarget,
    /// Episode length of the chain target.
    pub chain_episode_len: u32,
    pub compare: CompareSpec,
    /// Environment of the case-study target; its agent sections are unused.
    pub run: RunConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            output_root: PathBuf::from("runs"),
            target: CompareTarget::Chain,
            chain_episode_len: 10,
            compare: CompareSpec::default(),
            run: RunConfig::default(),
        }
    }
}

impl CompareConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: CompareConfig = io::read_toml(path)?;
        let base = config_dir(path);
        cfg.output_root = resolve(&base, &cfg.output_root);
        cfg.run.resolve_paths(&base);
        cfg.compare.ppo.validate()?;
        cfg.compare.dqn.validate()?;
        if cfg.target == CompareTarget::CaseStudy {
            cfg.run.validate()?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityConfig {
    /// Checkpoint whose policy and run config are evaluated.
    pub checkpoint: PathBuf,
    #[serde(default = "default_root")]
    pub output_root: PathBuf,
    /// Train a fresh agent under each multiplier instead of reusing the
    /// checkpoint's policy.
    #[serde(default)]
    pub retrain: bool,
    #[serde(default)]
    pub sensitivity: SensitivitySpec,
}

fn default_root() -> PathBuf {
    PathBuf::from("runs")
}

impl SensitivityConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: SensitivityConfig = io::read_toml(path)?;
        let base = config_dir(path);
        cfg.checkpoint = resolve(&base, &cfg.checkpoint);
        cfg.output_root = resolve(&base, &cfg.output_root);
        cfg.sensitivity.validate()?;
        Ok(cfg)
    }
}
