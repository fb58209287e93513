use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Environment;
use crate::error::{Error, Result};
use crate::math;
use crate::neural::{log_softmax, ForwardCache, Gradients, Head, Mlp, Optimizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    /// Steps each executor collects per update (M).
    pub steps_per_executor: usize,
    /// Parallel environment copies (N).
    pub executors: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// Clip range α.
    pub clip_range: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Optimization passes over each rollout (K).
    pub epochs: usize,
    pub minibatch_size: usize,
    pub iterations: u64,
    pub hidden: Vec<usize>,
    pub normalize_advantages: bool,
    /// Multiplies environment rewards before learning.
    pub reward_scale: f64,
    pub max_grad_norm: Option<f64>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            steps_per_executor: 128,
            executors: 4,
            learning_rate: 2.5e-4,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_range: 0.2,
            entropy_coef: 0.04,
            value_coef: 0.5,
            epochs: 4,
            minibatch_size: 128,
            iterations: 1000,
            hidden: alloc::vec![64, 64],
            normalize_advantages: true,
            reward_scale: 1.0,
            max_grad_norm: Some(0.5),
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_range > 0.0 && self.clip_range < 1.0) {
            return Err(Error::config("clip range must lie in (0, 1)"));
        }
        if !(self.entropy_coef >= 0.0) || !(self.value_coef >= 0.0) {
            return Err(Error::config("loss coefficients must be >= 0"));
        }
        if self.executors < 1 || self.steps_per_executor < 1 || self.epochs < 1 || self.minibatch_size < 1 {
            return Err(Error::config("executors, steps, epochs and minibatch size must be >= 1"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::config("gamma must lie in (0, 1] and lambda in [0, 1]"));
        }
        if !self.reward_scale.is_finite() {
            return Err(Error::config("reward scale must be finite"));
        }
        Ok(())
    }
}

/// Generalized advantage estimates and returns (advantage + value).
///
/// `next_values[t]` is the value of the state reached after step `t`: zero
/// for a terminal step, the critic's estimate otherwise. `episode_end[t]`
/// stops the recursion at episode boundaries.
pub fn compute_advantages(
    rewards: &[f64],
    values: &[f64],
    next_values: &[f64],
    episode_end: &[bool],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    let mut adv = alloc::vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        if episode_end[t] {
            running = 0.0;
        }
        let delta = rewards[t] + gamma * next_values[t] - values[t];
        running = delta + gamma * lambda * running;
        adv[t] = running;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Shifts and scales to zero mean and unit variance.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.len() < 2 {
        return;
    }
    let mean = math::mean(adv);
    let std = math::std_dev(adv);
    for a in adv.iter_mut() {
        *a = (*a - mean) / (std + 1e-8);
    }
}

/// One training sample of the clipped objective.
#[derive(Debug, Clone, Copy)]
pub struct PpoSample<'a> {
    pub observation: &'a [f64],
    pub action: usize,
    pub old_log_prob: f64,
    pub advantage: f64,
    pub return_: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    /// −E[min(ρA, clip(ρ)A)]
    pub policy: f64,
    /// E[(V − R)²]
    pub value: f64,
    pub entropy: f64,
    /// Share of samples whose clip was active.
    pub clip_fraction: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// Clipped-surrogate loss over `batch`; gradients are accumulated into
/// `policy_grads` and `value_grads`.
///
/// `loss = −E[min(ρA, clip(ρ, 1−α, 1+α)A)] + c_v·E[(V − R)²] − c_e·E[H]`.
pub fn clipped_loss(
    policy: &Mlp,
    value: &Mlp,
    batch: &[PpoSample<'_>],
    cfg: &PpoConfig,
    policy_grads: &mut Gradients,
    value_grads: &mut Gradients,
) -> Result<LossBreakdown> {
    if batch.is_empty() {
        return Ok(LossBreakdown::default());
    }
    let n = batch.len() as f64;
    let (lo, hi) = (1.0 - cfg.clip_range, 1.0 + cfg.clip_range);
    let mut out = LossBreakdown {
        ratio_min: f64::INFINITY,
        ratio_max: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut clipped = 0usize;
    let mut pcache: Option<ForwardCache> = None;
    let mut vcache: Option<ForwardCache> = None;
    let mut grad_logits = alloc::vec![0.0; policy.output_len()];
    for s in batch {
        let pc = match pcache.as_mut() {
            Some(c) => {
                policy.forward_into(s.observation, c)?;
                c
            }
            None => pcache.insert(policy.forward(s.observation)?),
        };
        let logp = log_softmax(pc.logits());
        let probs = pc.output();
        let ratio = math::exp(logp[s.action] - s.old_log_prob);
        if !ratio.is_finite() {
            return Err(Error::Diverged {
                iteration: 0,
                detail: alloc::format!("non-finite probability ratio (old log-prob {})", s.old_log_prob),
            });
        }
        out.ratio_min = out.ratio_min.min(ratio);
        out.ratio_max = out.ratio_max.max(ratio);
        let unclipped = ratio * s.advantage;
        let clipped_term = ratio.clamp(lo, hi) * s.advantage;
        let surrogate_grad = if unclipped <= clipped_term {
            // d(−ρA)/d log π = −ρA
            -unclipped
        } else {
            clipped += 1;
            0.0
        };
        out.policy -= unclipped.min(clipped_term) / n;

        let entropy: f64 = -probs.iter().zip(&logp).map(|(p, lp)| p * lp).sum::<f64>();
        out.entropy += entropy / n;
        for (j, g) in grad_logits.iter_mut().enumerate() {
            let onehot = if j == s.action { 1.0 } else { 0.0 };
            let d_logp = onehot - probs[j];
            let d_entropy = -probs[j] * (logp[j] + entropy);
            *g = (surrogate_grad * d_logp - cfg.entropy_coef * d_entropy) / n;
        }
        policy.backward_logits(pc, &grad_logits, policy_grads)?;

        let vc = match vcache.as_mut() {
            Some(c) => {
                value.forward_into(s.observation, c)?;
                c
            }
            None => vcache.insert(value.forward(s.observation)?),
        };
        let err = vc.output()[0] - s.return_;
        out.value += err * err / n;
        value.backward(vc, &[cfg.value_coef * 2.0 * err / n], value_grads)?;
    }
    out.clip_fraction = clipped as f64 / n;
    out.total = out.policy + cfg.value_coef * out.value - cfg.entropy_coef * out.entropy;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpoIterationLog {
    pub iteration: u64,
    /// Mean undiscounted reward of the episodes that finished during
    /// collection (carried over from the previous iteration if none did).
    pub mean_episode_reward: f64,
    pub episodes: u64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

/// Complete PPO training state; serializing it is a checkpoint.
///
/// Executors start a fresh episode at the beginning of every iteration, so
/// environment state never has to be checkpointed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoTrainer {
    pub cfg: PpoConfig,
    policy: Mlp,
    value: Mlp,
    policy_opt: Optimizer,
    value_opt: Optimizer,
    rng: ChaCha8Rng,
    iteration: u64,
    log: Vec<PpoIterationLog>,
}

pub struct PpoOutcome {
    pub policy: Mlp,
    pub value: Mlp,
    pub log: Vec<PpoIterationLog>,
}

struct Collected {
    observations: Vec<Vec<f64>>,
    actions: Vec<usize>,
    log_probs: Vec<f64>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
    episode_rewards: Vec<f64>,
}

impl PpoTrainer {
    pub fn new(cfg: PpoConfig, observation_len: usize, action_count: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let sizes = |out: usize| {
            let mut s = alloc::vec![observation_len];
            s.extend_from_slice(&cfg.hidden);
            s.push(out);
            s
        };
        Ok(Self {
            policy: Mlp::new(&sizes(action_count), Head::Softmax, seed)?,
            value: Mlp::new(&sizes(1), Head::Linear, seed.wrapping_add(1))?,
            policy_opt: Optimizer::adam(cfg.learning_rate)?,
            value_opt: Optimizer::adam(cfg.learning_rate)?,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5EED)),
            iteration: 0,
            log: Vec::new(),
            cfg,
        })
    }

    pub fn policy(&self) -> &Mlp {
        &self.policy
    }

    pub fn value(&self) -> &Mlp {
        &self.value
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn log(&self) -> &[PpoIterationLog] {
        &self.log
    }

    /// Environment steps consumed per iteration.
    pub fn steps_per_iteration(&self) -> u64 {
        (self.cfg.executors * self.cfg.steps_per_executor) as u64
    }

    fn sample_action(&mut self, obs: &[f64]) -> Result<(usize, f64)> {
        let cache = self.policy.forward(obs)?;
        let logp = log_softmax(cache.logits());
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let probs = cache.output();
        let mut action = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                action = i;
                break;
            }
        }
        Ok((action, logp[action]))
    }

    fn collect<E: Environment>(&mut self, envs: &mut [E]) -> Result<Collected> {
        let m = self.cfg.steps_per_executor;
        let total = m * envs.len();
        let mut c = Collected {
            observations: Vec::with_capacity(total),
            actions: Vec::with_capacity(total),
            log_probs: Vec::with_capacity(total),
            advantages: Vec::with_capacity(total),
            returns: Vec::with_capacity(total),
            episode_rewards: Vec::new(),
        };
        let scale = self.cfg.reward_scale;
        for env in envs.iter_mut() {
            let mut obs = env.reset(self.rng.gen())?;
            let mut rewards = Vec::with_capacity(m);
            let mut values = Vec::with_capacity(m);
            let mut next_values = Vec::with_capacity(m);
            let mut ends = Vec::with_capacity(m);
            let mut running = 0.0;
            for t in 0..m {
                let (action, logp) = self.sample_action(&obs)?;
                let v = self.value.predict(&obs)?[0];
                let step = env.step(action)?;
                running += step.reward;
                c.observations.push(core::mem::take(&mut obs));
                c.actions.push(action);
                c.log_probs.push(logp);
                values.push(v);
                rewards.push(step.reward * scale);
                ends.push(step.done());
                let next_v = if step.terminal { 0.0 } else { self.value.predict(&step.observation)?[0] };
                next_values.push(next_v);
                obs = if step.done() {
                    c.episode_rewards.push(running);
                    running = 0.0;
                    if t + 1 < m {
                        env.reset(self.rng.gen())?
                    } else {
                        step.observation
                    }
                } else {
                    step.observation
                };
            }
            let (adv, ret) =
                compute_advantages(&rewards, &values, &next_values, &ends, self.cfg.gamma, self.cfg.gae_lambda);
            c.advantages.extend(adv);
            c.returns.extend(ret);
        }
        if c.advantages.iter().chain(&c.returns).any(|x| !x.is_finite()) {
            return Err(Error::Diverged {
                iteration: self.iteration,
                detail: "non-finite advantage".into(),
            });
        }
        Ok(c)
    }

    /// One collect-and-update round across `envs` (one per executor).
    pub fn iterate<E: Environment>(&mut self, envs: &mut [E]) -> Result<PpoIterationLog> {
        if envs.len() != self.cfg.executors {
            return Err(Error::config(alloc::format!(
                "expected {} executor environments, got {}",
                self.cfg.executors,
                envs.len()
            )));
        }
        let mut c = self.collect(envs)?;
        if self.cfg.normalize_advantages {
            normalize_advantages(&mut c.advantages);
        }
        let mut order: Vec<usize> = (0..c.actions.len()).collect();
        let mut pg = self.policy.zero_gradients();
        let mut vg = self.value.zero_gradients();
        let mut sums = LossBreakdown::default();
        let mut batches = 0usize;
        for _ in 0..self.cfg.epochs {
            order.shuffle(&mut self.rng);
            for chunk in order.chunks(self.cfg.minibatch_size) {
                let batch: Vec<PpoSample<'_>> = chunk
                    .iter()
                    .map(|&i| PpoSample {
                        observation: &c.observations[i],
                        action: c.actions[i],
                        old_log_prob: c.log_probs[i],
                        advantage: c.advantages[i],
                        return_: c.returns[i],
                    })
                    .collect();
                pg.zero();
                vg.zero();
                let loss = clipped_loss(&self.policy, &self.value, &batch, &self.cfg, &mut pg, &mut vg).map_err(
                    |e| match e {
                        Error::Diverged { detail, .. } => Error::Diverged {
                            iteration: self.iteration,
                            detail,
                        },
                        other => other,
                    },
                )?;
                if !loss.total.is_finite() || !pg.is_finite() || !vg.is_finite() {
                    return Err(Error::Diverged {
                        iteration: self.iteration,
                        detail: "non-finite loss or gradient".into(),
                    });
                }
                if let Some(max) = self.cfg.max_grad_norm {
                    for g in [&mut pg, &mut vg] {
                        let norm = g.norm();
                        if norm > max {
                            g.scale(max / norm);
                        }
                    }
                }
                self.policy_opt.step(&mut self.policy, &pg)?;
                self.value_opt.step(&mut self.value, &vg)?;
                sums.policy += loss.policy;
                sums.value += loss.value;
                sums.entropy += loss.entropy;
                sums.clip_fraction += loss.clip_fraction;
                batches += 1;
            }
        }
        self.iteration += 1;
        let b = batches.max(1) as f64;
        let mean_episode_reward = if c.episode_rewards.is_empty() {
            self.log.last().map_or(0.0, |l| l.mean_episode_reward)
        } else {
            math::mean(&c.episode_rewards)
        };
        let entry = PpoIterationLog {
            iteration: self.iteration,
            mean_episode_reward,
            episodes: c.episode_rewards.len() as u64,
            policy_loss: sums.policy / b,
            value_loss: sums.value / b,
            entropy: sums.entropy / b,
            clip_fraction: sums.clip_fraction / b,
        };
        self.log.push(entry);
        Ok(entry)
    }

    /// Iterates until `cfg.iterations` have run in total.
    pub fn train<E: Environment>(&mut self, envs: &mut [E]) -> Result<()> {
        while self.iteration < self.cfg.iterations {
            self.iterate(envs)?;
        }
        Ok(())
    }

    pub fn into_outcome(self) -> PpoOutcome {
        PpoOutcome {
            policy: self.policy,
            value: self.value,
            log: self.log,
        }
    }
}

/// Trains a policy with `cfg.executors` environments built by `make_env`.
pub fn train_ppo<E, F>(mut make_env: F, cfg: PpoConfig, seed: u64) -> Result<PpoOutcome>
where
    E: Environment,
    F: FnMut(usize) -> Result<E>,
{
    let mut envs: Vec<E> = (0..cfg.executors).map(&mut make_env).collect::<Result<_>>()?;
    let (obs, actions) = (envs[0].observation_len(), envs[0].action_count());
    let mut trainer = PpoTrainer::new(cfg, obs, actions, seed)?;
    trainer.train(&mut envs)?;
    Ok(trainer.into_outcome())
}
