//! JSON training checkpoints.
//!
//! A checkpoint holds the complete trainer (networks, optimizer moments,
//! replay memory, RNG state and the iteration or episode counter) together
//! with the run config and the cost catalog it was trained against, so
//! resuming and reporting need no other input. Floats are written with
//! round-trip precision.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pavemr_core::agents::{DqnTrainer, PpoTrainer};
use pavemr_core::neural::Mlp;
use pavemr_core::rewardlca::CostCatalog;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io;

pub const CHECKPOINT_FORMAT: &str = "pavemr-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Ppo,
    Dqn,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Ppo => "ppo",
            Algo::Dqn => "dqn",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentState {
    Ppo(PpoTrainer),
    Dqn(DqnTrainer),
}

impl AgentState {
    pub fn algo(&self) -> Algo {
        match self {
            AgentState::Ppo(_) => Algo::Ppo,
            AgentState::Dqn(_) => Algo::Dqn,
        }
    }

    /// Network that picks greedy actions: the policy for PPO, the
    /// Q-network for DQN.
    pub fn acting_net(&self) -> &Mlp {
        match self {
            AgentState::Ppo(t) => t.policy(),
            AgentState::Dqn(t) => t.q_net(),
        }
    }

    /// Completed PPO iterations or DQN episodes.
    pub fn progress(&self) -> u64 {
        match self {
            AgentState::Ppo(t) => t.iteration(),
            AgentState::Dqn(t) => t.episodes(),
        }
    }

    pub fn target(&self) -> u64 {
        match self {
            AgentState::Ppo(t) => t.cfg.iterations,
            AgentState::Dqn(t) => t.cfg.episodes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    /// True once training reached its configured length.
    pub complete: bool,
    pub config: RunConfig,
    pub costs: CostCatalog,
    pub agent: AgentState,
}

impl Checkpoint {
    pub fn new(seed: u64, config: RunConfig, costs: CostCatalog, agent: AgentState) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            seed,
            complete: false,
            config,
            costs,
            agent,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let c: Checkpoint = io::read_json(path)?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(Error::format(path, format!("not a checkpoint (format `{}`)", c.format)));
        }
        if c.version != CHECKPOINT_VERSION {
            return Err(Error::format(path, format!("unsupported checkpoint version {}", c.version)));
        }
        c.costs.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pavemr_core::agents::PpoConfig;

    #[test]
    fn checkpoint_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let trainer = PpoTrainer::new(PpoConfig::default(), 22, 32, 3).unwrap();
        let c = Checkpoint::new(3, RunConfig::default(), CostCatalog::placeholder(10.0), AgentState::Ppo(trainer));
        c.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), c);
    }

    #[test]
    fn foreign_json_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        io::write_text(&path, "{\"format\": \"other\"}").unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap_err().exit_code(), 1);
    }
}
