use pavemr_core::agents::{
    tabular_greedy_policy, train_dqn, train_ppo, value_iteration, ChainMdp, DqnConfig, Environment, PpoConfig,
    PpoTrainer,
};
use pavemr_core::envmodel::{EnvironmentConfig, EpisodeSetup, InitialStateSampler, MaintenanceEnv};
use pavemr_core::rewardlca::CostCatalog;
use pavemr_core::runner::{compare_agents, generate_case_study, CaseStudyConfig, CompareSpec};

const GAMMA: f64 = 0.9;

fn chain_dqn() -> DqnConfig {
    DqnConfig {
        gamma: GAMMA,
        episodes: 300,
        epsilon_decay_steps: 2_000,
        warmup_steps: 200,
        batch_size: 32,
        target_sync_steps: 100,
        learning_rate: 1e-3,
        replay_capacity: 5_000,
        hidden: vec![32, 32],
        ..Default::default()
    }
}

fn chain_ppo() -> PpoConfig {
    PpoConfig {
        gamma: GAMMA,
        steps_per_executor: 32,
        minibatch_size: 32,
        iterations: 200,
        learning_rate: 1e-3,
        hidden: vec![16],
        ..Default::default()
    }
}

#[test]
fn dqn_recovers_the_chain_optimum_and_its_values() {
    let vi = value_iteration(&ChainMdp::new(20), GAMMA, 1e-12);
    let out = train_dqn(&mut ChainMdp::new(20), chain_dqn(), 1).unwrap();
    assert_eq!(tabular_greedy_policy(&out.q_net, 2, ChainMdp::observe).unwrap(), vi.policy);
    for s in 0..2 {
        let q = out.q_net.predict(&ChainMdp::observe(s)).unwrap();
        assert!((q[0] - 10.0).abs() <= 0.5, "state {s}: q(s, A) = {}", q[0]);
    }
}

#[test]
fn ppo_recovers_the_chain_optimum() {
    let vi = value_iteration(&ChainMdp::new(20), GAMMA, 1e-12);
    let out = train_ppo(|_| Ok(ChainMdp::new(20)), chain_ppo(), 1).unwrap();
    assert_eq!(tabular_greedy_policy(&out.policy, 2, ChainMdp::observe).unwrap(), vi.policy);
}

#[test]
fn comparison_on_the_chain_flags_the_faster_agent() {
    let spec = CompareSpec {
        seeds: vec![0, 1],
        budget_steps: 128 * 100,
        threshold_fraction: 0.9,
        window: 5,
        ppo: chain_ppo(),
        dqn: DqnConfig {
            episodes: u64::MAX,
            ..chain_dqn()
        },
    };
    let report = compare_agents(|| Ok(ChainMdp::new(20)), &spec).unwrap();
    assert!(report.summaries.iter().all(|s| s.env_steps == spec.budget_steps));
    assert!(report.summaries.iter().all(|s| s.final_mean_reward > 0.9 * 20.0));
    let flagged = report.fewer_steps.clone().unwrap();
    let best = report
        .summaries
        .iter()
        .min_by(|a, b| a.steps_to_threshold.unwrap().total_cmp(&b.steps_to_threshold.unwrap()))
        .unwrap();
    assert_eq!(flagged, best.agent);
}

fn zero_reward_envs(executors: usize) -> Vec<MaintenanceEnv> {
    let case = CaseStudyConfig::default();
    let fleet = generate_case_study(&case, 0).unwrap();
    let mut setup = EpisodeSetup::new(
        EnvironmentConfig::default(),
        CostCatalog::placeholder(case.segment_area_m2()),
        InitialStateSampler::Fleet { segments: fleet },
    );
    setup.reward.carbon_price = f64::INFINITY;
    (0..executors).map(|_| MaintenanceEnv::new(setup.clone(), None).unwrap()).collect()
}

/// Entropy per iteration of PPO trained where every reward is zero.
fn zero_reward_entropies(cfg: PpoConfig, iterations: usize) -> Vec<f64> {
    let mut envs = zero_reward_envs(cfg.executors);
    let mut trainer = PpoTrainer::new(cfg, envs[0].observation_len(), envs[0].action_count(), 5).unwrap();
    (0..iterations)
        .map(|_| {
            let log = trainer.iterate(&mut envs).unwrap();
            assert_eq!(log.mean_episode_reward, 0.0);
            log.entropy
        })
        .collect()
}

#[test]
fn zero_reward_control_keeps_policy_entropy_high() {
    let max_entropy = 32f64.ln();
    // Normalized advantages are pure value-estimate noise here, so entropy
    // wanders a little before the value net settles at zero.
    let cfg = PpoConfig {
        reward_scale: 1e5,
        ..Default::default()
    };
    let h = zero_reward_entropies(cfg.clone(), 150);
    assert!(h.iter().all(|&e| e > 0.9 * max_entropy), "min entropy {:?}", h.iter().copied().reduce(f64::min));
    assert!(*h.last().unwrap() > 0.98 * max_entropy);

    let raw = PpoConfig {
        normalize_advantages: false,
        ..cfg
    };
    let h = zero_reward_entropies(raw, 20);
    assert!(h.iter().all(|&e| (e - max_entropy).abs() < 1e-3 * max_entropy));
}
