//! Reinforcement-learning agents: DQN with replay memory and a target
//! network, PPO with the clipped surrogate objective, and greedy plan
//! extraction.

mod dqn;
mod plan;
mod ppo;
mod replay;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::math;
use crate::neural::Mlp;

pub use dqn::{td_targets, train_dqn, DqnConfig, DqnEpisodeLog, DqnOutcome, DqnTrainer};
pub use plan::{greedy_plan, ArgmaxPolicy, Plan, Policy, RandomPolicy};
pub use ppo::{
    clipped_loss, compute_advantages, normalize_advantages, train_ppo, LossBreakdown, PpoConfig, PpoIterationLog,
    PpoOutcome, PpoSample, PpoTrainer,
};
pub use replay::{ReplayMemory, Transition};

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// The episode ended in a state with no future value.
    pub terminal: bool,
    /// The episode was cut off; the final state still has value.
    pub truncated: bool,
}

impl Step {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// Episodic environment with a discrete action space.
pub trait Environment {
    fn observation_len(&self) -> usize;
    fn action_count(&self) -> usize;
    /// Starts an episode; the same seed always gives the same start.
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;
    fn step(&mut self, action: usize) -> Result<Step>;
}

/// A finite MDP with deterministic transitions, for exact solution.
pub trait TabularMdp {
    fn state_count(&self) -> usize;
    fn action_count(&self) -> usize;
    /// `(next_state, reward)`.
    fn transition(&self, state: usize, action: usize) -> (usize, f64);
}

/// Two states, two actions. Action 0 pays 1 and swaps the state, action 1
/// pays 0 and stays. Episodes are cut off after `episode_len` steps without
/// being terminal, so values are those of the infinite-horizon problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMdp {
    pub episode_len: u32,
    state: usize,
    t: u32,
}

impl ChainMdp {
    pub fn new(episode_len: u32) -> Self {
        Self {
            episode_len,
            state: 0,
            t: 0,
        }
    }

    pub fn observe(state: usize) -> Vec<f64> {
        let mut o = vec![0.0; 2];
        o[state] = 1.0;
        o
    }
}

impl TabularMdp for ChainMdp {
    fn state_count(&self) -> usize {
        2
    }

    fn action_count(&self) -> usize {
        2
    }

    fn transition(&self, state: usize, action: usize) -> (usize, f64) {
        if action == 0 {
            (1 - state, 1.0)
        } else {
            (state, 0.0)
        }
    }
}

impl Environment for ChainMdp {
    fn observation_len(&self) -> usize {
        2
    }

    fn action_count(&self) -> usize {
        2
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        self.state = (seed & 1) as usize;
        self.t = 0;
        Ok(Self::observe(self.state))
    }

    fn step(&mut self, action: usize) -> Result<Step> {
        if action >= 2 {
            return Err(crate::Error::validation(alloc::format!("invalid action {action}")));
        }
        let (next, reward) = self.transition(self.state, action);
        self.state = next;
        self.t += 1;
        Ok(Step {
            observation: Self::observe(next),
            reward,
            terminal: false,
            truncated: self.t >= self.episode_len,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIteration {
    pub values: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub policy: Vec<usize>,
}

/// Solves a deterministic tabular MDP by value iteration to `tolerance`.
pub fn value_iteration<M: TabularMdp>(mdp: &M, gamma: f64, tolerance: f64) -> ValueIteration {
    let (ns, na) = (mdp.state_count(), mdp.action_count());
    let mut values = vec![0.0; ns];
    let mut q = vec![vec![0.0; na]; ns];
    loop {
        let mut delta: f64 = 0.0;
        for s in 0..ns {
            for a in 0..na {
                let (next, r) = mdp.transition(s, a);
                q[s][a] = r + gamma * values[next];
            }
            let best = q[s].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max(math::abs(best - values[s]));
            values[s] = best;
        }
        if delta < tolerance {
            break;
        }
    }
    let policy = q.iter().map(|row| math::argmax(row)).collect();
    ValueIteration { values, q, policy }
}

/// With probability `epsilon` a uniform action, otherwise the argmax of
/// `q_values` (ties to the lowest id).
pub fn epsilon_greedy<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q_values.len())
    } else {
        math::argmax(q_values)
    }
}

/// Greedy action of `net` for every state of a tabular problem whose
/// observations are produced by `observe`.
pub fn tabular_greedy_policy(net: &Mlp, states: usize, observe: impl Fn(usize) -> Vec<f64>) -> Result<Vec<usize>> {
    (0..states).map(|s| Ok(math::argmax(&net.predict(&observe(s))?))).collect()
}
