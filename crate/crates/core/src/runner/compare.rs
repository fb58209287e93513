use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::agents::{DqnConfig, DqnTrainer, Environment, PpoConfig, PpoTrainer};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareSpec {
    pub seeds: Vec<u64>,
    /// Environment steps each agent may consume per seed.
    pub budget_steps: u64,
    /// Steps-to-threshold uses this share of the best final reward.
    pub threshold_fraction: f64,
    /// Moving-average window (curve points) for smoothing.
    pub window: usize,
    pub ppo: PpoConfig,
    pub dqn: DqnConfig,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self {
            seeds: alloc::vec![0, 1, 2],
            budget_steps: 512 * 200,
            threshold_fraction: 0.9,
            window: 10,
            ppo: PpoConfig::default(),
            dqn: DqnConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub agent: String,
    pub seed: u64,
    pub env_steps: u64,
    pub mean_episode_reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: String,
    /// Environment steps consumed per seed.
    pub env_steps: u64,
    /// Seed mean of the final moving-average reward.
    pub final_mean_reward: f64,
    /// Seed mean of the first step count at which the moving average reached
    /// the threshold; `None` if some seed never did.
    pub steps_to_threshold: Option<f64>,
    /// Seed mean of the reward variance over the second half of the curve.
    pub curve_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub budget_steps: u64,
    pub threshold: f64,
    pub curves: Vec<CurvePoint>,
    pub summaries: Vec<AgentSummary>,
    /// Agent that reached the threshold with fewer steps, if any did.
    pub fewer_steps: Option<String>,
}

fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    (0..values.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            math::mean(&values[lo..=i])
        })
        .collect()
}

/// Trains PPO and DQN on equal environment-step budgets for every seed.
pub fn compare_agents<E, F>(mut make_env: F, spec: &CompareSpec) -> Result<ComparisonReport>
where
    E: Environment,
    F: FnMut() -> Result<E>,
{
    if spec.seeds.is_empty() || spec.budget_steps == 0 {
        return Err(Error::config("comparison needs seeds and a positive step budget"));
    }
    let per_iter = (spec.ppo.executors * spec.ppo.steps_per_executor) as u64;
    if !spec.budget_steps.is_multiple_of(per_iter) {
        return Err(Error::config(alloc::format!(
            "step budget must be a multiple of the PPO batch ({per_iter} steps)"
        )));
    }
    let mut curves = Vec::new();
    let mut steps_used = [0u64; 2];
    for &seed in &spec.seeds {
        let mut envs: Vec<E> = (0..spec.ppo.executors).map(|_| make_env()).collect::<Result<_>>()?;
        let (obs, actions) = (envs[0].observation_len(), envs[0].action_count());
        let mut ppo = PpoTrainer::new(spec.ppo.clone(), obs, actions, seed)?;
        while ppo.iteration() * per_iter < spec.budget_steps {
            let log = ppo.iterate(&mut envs)?;
            curves.push(CurvePoint {
                agent: "ppo".into(),
                seed,
                env_steps: log.iteration * per_iter,
                mean_episode_reward: log.mean_episode_reward,
            });
        }
        steps_used[0] = ppo.iteration() * per_iter;

        let mut env = make_env()?;
        let mut dqn = DqnTrainer::new(spec.dqn.clone(), obs, actions, seed)?;
        dqn.train_steps(&mut env, spec.budget_steps)?;
        for e in dqn.log() {
            curves.push(CurvePoint {
                agent: "dqn".into(),
                seed,
                env_steps: e.env_steps,
                mean_episode_reward: e.total_reward,
            });
        }
        steps_used[1] = dqn.env_steps();
    }

    let smoothed = |agent: &str, seed: u64| -> (Vec<u64>, Vec<f64>, Vec<f64>) {
        let pts: Vec<&CurvePoint> = curves.iter().filter(|c| c.agent == agent && c.seed == seed).collect();
        let raw: Vec<f64> = pts.iter().map(|c| c.mean_episode_reward).collect();
        (pts.iter().map(|c| c.env_steps).collect(), moving_average(&raw, spec.window), raw)
    };
    let agents = ["ppo", "dqn"];
    let finals: Vec<f64> = agents
        .iter()
        .map(|a| {
            let v: Vec<f64> =
                spec.seeds.iter().map(|&s| smoothed(a, s).1.last().copied().unwrap_or(0.0)).collect();
            math::mean(&v)
        })
        .collect();
    let best = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = spec.threshold_fraction * best;

    let mut summaries = Vec::new();
    for (k, agent) in agents.iter().enumerate() {
        let mut reach = Vec::new();
        let mut variances = Vec::new();
        for &seed in &spec.seeds {
            let (steps, avg, raw) = smoothed(agent, seed);
            reach.push(avg.iter().position(|&v| v >= threshold).map(|i| steps[i] as f64));
            let tail = &raw[raw.len() / 2..];
            let sd = math::std_dev(tail);
            variances.push(sd * sd);
        }
        let steps_to_threshold = reach
            .iter()
            .copied()
            .collect::<Option<Vec<f64>>>()
            .map(|v| math::mean(&v));
        summaries.push(AgentSummary {
            agent: String::from(*agent),
            env_steps: steps_used[k],
            final_mean_reward: finals[k],
            steps_to_threshold,
            curve_variance: math::mean(&variances),
        });
    }
    let fewer_steps = match (summaries[0].steps_to_threshold, summaries[1].steps_to_threshold) {
        (Some(p), Some(d)) if p <= d => Some(summaries[0].agent.clone()),
        (Some(_), Some(_)) => Some(summaries[1].agent.clone()),
        (Some(_), None) => Some(summaries[0].agent.clone()),
        (None, Some(_)) => Some(summaries[1].agent.clone()),
        (None, None) => None,
    };
    Ok(ComparisonReport {
        budget_steps: spec.budget_steps,
        threshold,
        curves,
        summaries,
        fewer_steps,
    })
}
