use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Environment;
use crate::domain::SegmentState;
use crate::envmodel::MaintenanceEnv;
use crate::error::Result;
use crate::math;
use crate::neural::Mlp;
use crate::rewardlca::RewardLedger;

/// Chooses an action from an observation.
pub trait Policy {
    fn select(&mut self, observation: &[f64]) -> Result<usize>;
}

/// Argmax over a network's outputs: Q-values or policy probabilities.
#[derive(Debug, Clone, Copy)]
pub struct ArgmaxPolicy<'a>(pub &'a Mlp);

impl Policy for ArgmaxPolicy<'_> {
    fn select(&mut self, observation: &[f64]) -> Result<usize> {
        Ok(math::argmax(&self.0.predict(observation)?))
    }
}

/// Uniform over `actions`, seeded.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
    actions: usize,
}

impl RandomPolicy {
    pub fn new(actions: usize, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            actions,
        }
    }
}

impl Policy for RandomPolicy {
    fn select(&mut self, _: &[f64]) -> Result<usize> {
        Ok(self.rng.gen_range(0..self.actions))
    }
}

/// A rolled-out maintenance plan for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub actions: Vec<u8>,
    /// Yearly (iri, rd), `actions.len() + 1` points.
    pub trajectory: Vec<(f64, f64)>,
    pub baseline: Vec<(f64, f64)>,
    pub ledger: RewardLedger,
}

impl Plan {
    pub fn final_effcost(&self) -> f64 {
        self.ledger.final_effcost()
    }

    /// Discounted cost of each year's action.
    pub fn yearly_costs(&self) -> Vec<f64> {
        self.ledger.entries().iter().map(|e| e.discounted_cost).collect()
    }
}

/// Rolls `policy` out from `s0` for `horizon` years.
pub fn greedy_plan<P: Policy + ?Sized>(
    policy: &mut P,
    env: &mut MaintenanceEnv,
    s0: &SegmentState,
    horizon: u32,
) -> Result<Plan> {
    let mut obs = env.begin(*s0, horizon)?;
    while !env.is_done() {
        let a = policy.select(&obs)?;
        obs = env.step(a)?.observation;
    }
    Ok(Plan {
        actions: env.actions().to_vec(),
        trajectory: env.trajectory().to_vec(),
        baseline: env.baseline().to_vec(),
        ledger: env.ledger().clone(),
    })
}
