use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{epsilon_greedy, Environment, ReplayMemory, Transition};
use crate::error::{Error, Result};
use crate::math;
use crate::neural::{Head, Mlp, Optimizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqnConfig {
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Environment steps over which epsilon decays linearly.
    pub epsilon_decay_steps: u64,
    pub batch_size: usize,
    pub target_sync_steps: u64,
    pub learning_rate: f64,
    pub episodes: u64,
    pub replay_capacity: usize,
    /// Transitions stored before learning starts.
    pub warmup_steps: u64,
    pub hidden: Vec<usize>,
    /// Bootstrap from a separate, periodically synced target network. When
    /// false the online network is its own target.
    pub target_network: bool,
    /// Multiplies environment rewards before learning.
    pub reward_scale: f64,
    pub max_grad_norm: Option<f64>,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 20_000,
            batch_size: 64,
            target_sync_steps: 500,
            learning_rate: 2.5e-4,
            episodes: 1000,
            replay_capacity: 50_000,
            warmup_steps: 1000,
            hidden: alloc::vec![64, 64],
            target_network: true,
            reward_scale: 1.0,
            max_grad_norm: Some(10.0),
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma must lie in (0, 1]"));
        }
        if !unit(self.epsilon_start) || !unit(self.epsilon_end) {
            return Err(Error::config("epsilon must lie in [0, 1]"));
        }
        if self.target_sync_steps < 1 || self.batch_size < 1 || self.replay_capacity < self.batch_size {
            return Err(Error::config("sync period and batch size must be >= 1 and fit in replay"));
        }
        if !(self.reward_scale.is_finite()) {
            return Err(Error::config("reward scale must be finite"));
        }
        Ok(())
    }

    /// Linearly decayed exploration rate after `step` environment steps.
    pub fn epsilon(&self, step: u64) -> f64 {
        if self.epsilon_decay_steps == 0 || step >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let f = step as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_start + f * (self.epsilon_end - self.epsilon_start)
    }
}

/// Bootstrap targets `r + γ·max_a q(s′, a; θ′)`, without the bootstrap term
/// on terminal transitions. Pass the online network as `target` for
/// single-network targets.
pub fn td_targets(batch: &[&Transition], online: &Mlp, target: &Mlp, gamma: f64) -> Result<Vec<f64>> {
    if online.sizes() != target.sizes() {
        return Err(Error::Contract("online and target networks differ in shape".to_string()));
    }
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                return Ok(t.reward);
            }
            let q = target.predict(&t.next_state)?;
            let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(t.reward + gamma * best)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqnEpisodeLog {
    pub episode: u64,
    pub env_steps: u64,
    pub total_reward: f64,
    pub epsilon: f64,
    pub mean_loss: f64,
}

/// Complete DQN training state; serializing it is a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnTrainer {
    pub cfg: DqnConfig,
    q: Mlp,
    target: Mlp,
    opt: Optimizer,
    replay: ReplayMemory,
    rng: ChaCha8Rng,
    env_steps: u64,
    episodes: u64,
    log: Vec<DqnEpisodeLog>,
}

pub struct DqnOutcome {
    pub q_net: Mlp,
    pub log: Vec<DqnEpisodeLog>,
}

impl DqnTrainer {
    pub fn new(cfg: DqnConfig, observation_len: usize, action_count: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut sizes = alloc::vec![observation_len];
        sizes.extend_from_slice(&cfg.hidden);
        sizes.push(action_count);
        let q = Mlp::new(&sizes, Head::Linear, seed)?;
        Ok(Self {
            target: q.clone(),
            opt: Optimizer::adam(cfg.learning_rate)?,
            replay: ReplayMemory::new(cfg.replay_capacity)?,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9)),
            env_steps: 0,
            episodes: 0,
            log: Vec::new(),
            q,
            cfg,
        })
    }

    pub fn q_net(&self) -> &Mlp {
        &self.q
    }

    pub fn log(&self) -> &[DqnEpisodeLog] {
        &self.log
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn replay(&self) -> &ReplayMemory {
        &self.replay
    }

    /// Runs one episode, learning after every step once warm.
    pub fn run_episode<E: Environment>(&mut self, env: &mut E) -> Result<DqnEpisodeLog> {
        self.episode(env, u64::MAX)
    }

    /// Runs episodes until exactly `budget` environment steps have been
    /// taken in total; the last episode may be cut short.
    pub fn train_steps<E: Environment>(&mut self, env: &mut E, budget: u64) -> Result<()> {
        while self.env_steps < budget {
            self.episode(env, budget)?;
        }
        Ok(())
    }

    fn episode<E: Environment>(&mut self, env: &mut E, step_limit: u64) -> Result<DqnEpisodeLog> {
        let mut obs = env.reset(self.rng.gen())?;
        let mut total_reward = 0.0;
        let mut losses = Vec::new();
        while self.env_steps < step_limit {
            let epsilon = self.cfg.epsilon(self.env_steps);
            let q = self.q.predict(&obs)?;
            let action = epsilon_greedy(&q, epsilon, &mut self.rng);
            let step = env.step(action)?;
            total_reward += step.reward;
            self.env_steps += 1;
            self.replay.push(Transition {
                state: core::mem::take(&mut obs),
                action,
                reward: step.reward * self.cfg.reward_scale,
                next_state: step.observation.clone(),
                terminal: step.terminal,
            });
            if self.env_steps > self.cfg.warmup_steps && self.replay.len() >= self.cfg.batch_size {
                losses.push(self.learn()?);
            }
            if self.env_steps.is_multiple_of(self.cfg.target_sync_steps) {
                self.target.copy_params_from(&self.q)?;
            }
            let done = step.done();
            obs = step.observation;
            if done {
                break;
            }
        }
        self.episodes += 1;
        let entry = DqnEpisodeLog {
            episode: self.episodes,
            env_steps: self.env_steps,
            total_reward,
            epsilon: self.cfg.epsilon(self.env_steps),
            mean_loss: if losses.is_empty() { 0.0 } else { math::mean(&losses) },
        };
        self.log.push(entry);
        Ok(entry)
    }

    /// Trains until `cfg.episodes` episodes have run in total.
    pub fn train<E: Environment>(&mut self, env: &mut E) -> Result<()> {
        while self.episodes < self.cfg.episodes {
            self.run_episode(env)?;
        }
        Ok(())
    }

    fn learn(&mut self) -> Result<f64> {
        let batch = self.replay.sample(self.cfg.batch_size, &mut self.rng)?;
        let target_net = if self.cfg.target_network { &self.target } else { &self.q };
        let targets = td_targets(&batch, &self.q, target_net, self.cfg.gamma)?;
        let mut grads = self.q.zero_gradients();
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut grad_out = alloc::vec![0.0; self.q.output_len()];
        for (t, y) in batch.iter().zip(&targets) {
            let cache = self.q.forward(&t.state)?;
            let err = cache.output()[t.action] - y;
            loss += 0.5 * err * err / n;
            grad_out.iter_mut().for_each(|g| *g = 0.0);
            grad_out[t.action] = err / n;
            self.q.backward(&cache, &grad_out, &mut grads)?;
        }
        if !loss.is_finite() || !grads.is_finite() {
            return Err(Error::Diverged {
                iteration: self.episodes,
                detail: alloc::format!("non-finite TD loss at environment step {}", self.env_steps),
            });
        }
        if let Some(max) = self.cfg.max_grad_norm {
            let norm = grads.norm();
            if norm > max {
                grads.scale(max / norm);
            }
        }
        self.opt.step(&mut self.q, &grads)?;
        Ok(loss)
    }
}

/// Trains a Q-network for `cfg.episodes` episodes.
pub fn train_dqn<E: Environment>(env: &mut E, cfg: DqnConfig, seed: u64) -> Result<DqnOutcome> {
    let mut trainer = DqnTrainer::new(cfg, env.observation_len(), env.action_count(), seed)?;
    trainer.train(env)?;
    Ok(DqnOutcome {
        q_net: trainer.q.clone(),
        log: trainer.log,
    })
}
