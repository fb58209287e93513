use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnvironmentConfig, IndicatorCaps, InitialStateSampler, Simulator, SurrogatePair};
use crate::agents::{Environment, Step};
use crate::dataprep::FeatureRange;
use crate::domain::{encode_agent_state, SegmentState, StateEncoder, Vocabulary, ACTION_COUNT, AGENT_FEATURES};
use crate::error::{Error, Result};
use crate::rewardlca::{step_area, CostCatalog, RewardConfig, RewardLedger};

/// Fixed encoder ranges wide enough for the case study and its traffic
/// sensitivity runs; categorical and flag slots are overwritten by
/// [`StateEncoder::from_ranges`].
pub fn default_agent_ranges(caps: &IndicatorCaps) -> [FeatureRange; AGENT_FEATURES] {
    let thickness = FeatureRange::new(0.0, 600.0);
    let unit = FeatureRange::new(0.0, 1.0);
    let mut r = [unit; AGENT_FEATURES];
    for i in 0..4 {
        r[3 * i + 1] = thickness;
    }
    r[13] = FeatureRange::new(0.0, 1.5e7);
    r[14] = FeatureRange::new(0.0, 3.0e5);
    r[15] = FeatureRange::new(0.0, 2500.0);
    r[16] = FeatureRange::new(0.0, 150.0);
    r[19] = FeatureRange::new(0.0, caps.iri_max);
    r[20] = FeatureRange::new(0.0, caps.rd_max);
    r
}

/// Everything needed to build a [`MaintenanceEnv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSetup {
    pub environment: EnvironmentConfig,
    pub reward: RewardConfig,
    pub costs: CostCatalog,
    pub sampler: InitialStateSampler,
    pub encoder: StateEncoder,
    /// Appends the elapsed share of the horizon to the observation.
    pub observe_progress: bool,
}

impl EpisodeSetup {
    pub fn new(environment: EnvironmentConfig, costs: CostCatalog, sampler: InitialStateSampler) -> Self {
        let encoder = StateEncoder::from_ranges(&Vocabulary::standard(), &default_agent_ranges(&environment.caps));
        Self {
            environment,
            reward: RewardConfig::default(),
            costs,
            sampler,
            encoder,
            observe_progress: true,
        }
    }
}

/// One segment over a planning horizon: transitions, the do-nothing
/// baseline and the reward ledger.
#[derive(Debug, Clone)]
pub struct MaintenanceEnv {
    sim: Simulator,
    reward: RewardConfig,
    costs: CostCatalog,
    sampler: InitialStateSampler,
    encoder: StateEncoder,
    observe_progress: bool,
    horizon: u32,
    t: u32,
    state: SegmentState,
    baseline: Vec<(f64, f64)>,
    trajectory: Vec<(f64, f64)>,
    actions: Vec<u8>,
    ledger: RewardLedger,
}

impl MaintenanceEnv {
    pub fn new(setup: EpisodeSetup, surrogate: Option<SurrogatePair>) -> Result<Self> {
        setup.reward.validate()?;
        setup.costs.validate()?;
        setup.sampler.validate()?;
        let sim = Simulator::new(setup.environment, surrogate)?;
        let state = setup.sampler.sample(&mut ChaCha8Rng::seed_from_u64(0))?;
        encode_agent_state(&state, &setup.encoder)?;
        let mut env = Self {
            horizon: sim.config().horizon_years,
            sim,
            ledger: RewardLedger::new(&setup.reward),
            reward: setup.reward,
            costs: setup.costs,
            sampler: setup.sampler,
            encoder: setup.encoder,
            observe_progress: setup.observe_progress,
            t: 0,
            state,
            baseline: Vec::new(),
            trajectory: Vec::new(),
            actions: Vec::new(),
        };
        env.begin(state, env.horizon)?;
        Ok(env)
    }

    /// Starts an episode from `s0` with a custom horizon.
    pub fn begin(&mut self, s0: SegmentState, horizon: u32) -> Result<Vec<f64>> {
        s0.validate()?;
        self.baseline = self.sim.baseline_trajectory(&s0, horizon)?;
        self.horizon = horizon;
        self.t = 0;
        self.state = s0;
        self.trajectory.clear();
        self.trajectory.push((s0.iri, s0.rd));
        self.actions.clear();
        self.ledger = RewardLedger::new(&self.reward);
        self.observation()
    }

    pub fn observation(&self) -> Result<Vec<f64>> {
        let mut obs = encode_agent_state(&self.state, &self.encoder)?.to_vec();
        if self.observe_progress {
            obs.push(if self.horizon == 0 { 1.0 } else { self.t as f64 / self.horizon as f64 });
        }
        Ok(obs)
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn sampler(&self) -> &InitialStateSampler {
        &self.sampler
    }

    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward
    }

    pub fn costs(&self) -> &CostCatalog {
        &self.costs
    }

    pub fn state(&self) -> &SegmentState {
        &self.state
    }

    pub fn ledger(&self) -> &RewardLedger {
        &self.ledger
    }

    /// Do-nothing (iri, rd) curve of the current episode.
    pub fn baseline(&self) -> &[(f64, f64)] {
        &self.baseline
    }

    /// Actual (iri, rd) curve so far, starting with the initial state.
    pub fn trajectory(&self) -> &[(f64, f64)] {
        &self.trajectory
    }

    pub fn actions(&self) -> &[u8] {
        &self.actions
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn elapsed(&self) -> u32 {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.horizon
    }
}

impl Environment for MaintenanceEnv {
    fn observation_len(&self) -> usize {
        AGENT_FEATURES + usize::from(self.observe_progress)
    }

    fn action_count(&self) -> usize {
        ACTION_COUNT
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let s0 = self.sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed))?;
        self.begin(s0, self.sim.config().horizon_years)
    }

    fn step(&mut self, action: usize) -> Result<Step> {
        if self.is_done() {
            return Err(Error::Contract("step after the end of the horizon".into()));
        }
        let next = self.sim.step(&self.state, action)?;
        let t = self.t as usize;
        let (b0, b1) = (self.baseline[t], self.baseline[t + 1]);
        let areas = [
            step_area((b0.0, b1.0), (self.state.iri, next.iri), self.reward.iri_range)?,
            step_area((b0.1, b1.1), (self.state.rd, next.rd), self.reward.rd_range)?,
        ];
        let reward = self.ledger.update(areas, action, self.t, &self.costs, &self.reward)?;
        self.state = next;
        self.t += 1;
        self.trajectory.push((next.iri, next.rd));
        self.actions.push(action as u8);
        Ok(Step {
            observation: self.observation()?,
            reward,
            terminal: self.is_done(),
            truncated: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::segment;
    use alloc::vec;

    fn env() -> MaintenanceEnv {
        let setup = EpisodeSetup::new(
            EnvironmentConfig::default(),
            CostCatalog::placeholder(10_000.0),
            InitialStateSampler::Fleet {
                segments: vec![segment(1.1, 3.0), segment(1.4, 4.0)],
            },
        );
        MaintenanceEnv::new(setup, None).unwrap()
    }

    #[test]
    fn do_nothing_episode_is_neutral() {
        let mut e = env();
        e.reset(3).unwrap();
        for _ in 0..20 {
            let s = e.step(0).unwrap();
            assert_eq!(s.reward, 0.0);
        }
        assert!(e.is_done());
        assert_eq!(e.ledger().total_cost(), 0.0);
        assert_eq!(e.trajectory(), e.baseline());
        assert!(e.step(0).is_err());
    }

    #[test]
    fn observation_has_progress_slot() {
        let mut e = env();
        let o = e.reset(0).unwrap();
        assert_eq!(o.len(), 22);
        assert_eq!(o[21], 0.0);
        let s = e.step(5).unwrap();
        assert_eq!(s.observation[21], 0.05);
    }

    #[test]
    fn rewards_telescope() {
        let mut e = env();
        e.reset(1).unwrap();
        let mut sum = 0.0;
        for t in 0..20 {
            sum += e.step([0, 30, 0, 16, 29][t % 5]).unwrap().reward;
        }
        assert!((sum - e.ledger().final_effcost()).abs() < 1e-12);
    }
}
