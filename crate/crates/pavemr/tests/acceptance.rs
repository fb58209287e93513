//! Acceptance suite. Each criterion prints one PASS or FAIL line to stderr;
//! the process exits nonzero if any criterion fails.
//!
//! Criteria 7 to 9 share one full-length PPO run on the default case study,
//! trained through the same code path as `pavemr train-agent`.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pavemr::checkpoint::{Algo, Checkpoint};
use pavemr::commands::{self, TrainStart};
use pavemr::config::{RunConfig, SensitivityConfig};
use pavemr_core::agents::{
    clipped_loss, tabular_greedy_policy, td_targets, train_dqn, train_ppo, value_iteration, ChainMdp, DqnConfig,
    Environment, PpoConfig, PpoSample, Transition,
};
use pavemr_core::dataprep::{calibrate_monotone, DayStamp, Indicator, IndicatorSeries, Observation};
use pavemr_core::domain::build_action_catalog;
use pavemr_core::envmodel::MaintenanceEnv;
use pavemr_core::neural::{grad_check, grad_check_with, log_softmax, Head, Mlp};
use pavemr_core::rewardlca::{
    discounted_step_cost, gwp_co2e, CostCatalog, EmissionsInventory, GwpTable, Pollutant, RewardConfig, Stage,
};
use pavemr_core::runner::{case_study_env, generate_case_study, sensitivity_inversions, CaseStudyConfig, PlanReport};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn fleet_env(seed: u64) -> MaintenanceEnv {
    let case = CaseStudyConfig::default();
    case_study_env(&case, &generate_case_study(&case, seed).unwrap()).unwrap()
}

// ---------------------------------------------------------------- 1

/// CO₂e per kg in `Pollutant::ALL` order, typed in here rather than read
/// from the library.
const GWP: [f64; 7] = [0.0, 1.0, 0.0, 0.0, 3.0, 21.0, 310.0];

struct Recomputed {
    areas: [f64; 2],
    cost: f64,
    effcost: f64,
}

/// Re-sums areas and costs from the raw trajectory with no incremental
/// state.
fn brute_force(env: &MaintenanceEnv, costs: &CostCatalog, cfg: &RewardConfig) -> Recomputed {
    let traj = env.trajectory();
    let base = env.baseline();
    let widths = [cfg.iri_range.max - cfg.iri_range.min, cfg.rd_range.max - cfg.rd_range.min];
    let mut areas = [0.0; 2];
    for t in 0..env.actions().len() {
        let g0 = [base[t].0 - traj[t].0, base[t].1 - traj[t].1];
        let g1 = [base[t + 1].0 - traj[t + 1].0, base[t + 1].1 - traj[t + 1].1];
        for i in 0..2 {
            areas[i] += 0.5 * (g0[i] + g1[i]) / widths[i];
        }
    }
    let mut cost = 0.0;
    for (t, &a) in env.actions().iter().enumerate() {
        let c = costs.get(a as usize).unwrap();
        let kg: f64 = c
            .emissions
            .kg
            .iter()
            .flat_map(|stage| stage.iter().enumerate().map(|(p, m)| m * GWP[p]))
            .sum();
        let env_part = if kg == 0.0 { 0.0 } else { kg / 1000.0 * cfg.carbon_price };
        cost += (c.economic_cost + env_part) / 1.04f64.powi(t as i32);
    }
    let effcost = if cost == 0.0 { 0.0 } else { (0.55 * areas[0] + 0.45 * areas[1]) / cost };
    Recomputed { areas, cost, effcost }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn reward_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut env = fleet_env(11);
    let mut worst = 0.0f64;
    for case in 0..100 {
        env.reset(rng.gen()).map_err(fail)?;
        let mut rewards = 0.0;
        for _ in 0..20 {
            rewards += env.step(rng.gen_range(0..32)).map_err(fail)?.reward;
        }
        let oracle = brute_force(&env, env.costs(), env.reward_config());
        let ledger = env.ledger();
        let pairs = [
            (ledger.total_area()[0], oracle.areas[0]),
            (ledger.total_area()[1], oracle.areas[1]),
            (ledger.total_cost(), oracle.cost),
            (ledger.final_effcost(), oracle.effcost),
        ];
        for (got, want) in pairs {
            if !close(got, want) {
                return Err(format!("trajectory {case}: ledger {got:e} vs recomputed {want:e}"));
            }
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
        let gap = (rewards - ledger.final_effcost()).abs();
        if gap > 1e-9 {
            return Err(format!("trajectory {case}: rewards sum differs from final effcost by {gap:e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        secs < 10.0,
        format!("100 trajectories, worst relative gap {worst:.1e}, {secs:.2} s"),
    )
}

// ---------------------------------------------------------------- 2

fn gwp_and_discount() -> Outcome {
    let gwp = GwpTable::default();
    for p in Pollutant::ALL {
        for stage in Stage::ALL {
            let got = gwp_co2e(&EmissionsInventory::single(stage, p, 1000.0), &gwp).map_err(fail)?;
            if got != GWP[p.index()] {
                return Err(format!("{p:?} in {stage:?}: {got} t CO2e per t, expected {}", GWP[p.index()]));
            }
        }
    }
    let catalog = CostCatalog::placeholder(CaseStudyConfig::default().segment_area_m2());
    let cfg = RewardConfig::default();
    let mut worst_ulps = 0.0f64;
    for id in 1..32 {
        for t in 0..40 {
            let now = discounted_step_cost(id, &catalog, &cfg, t).map_err(fail)?;
            let next = discounted_step_cost(id, &catalog, &cfg, t + 1).map_err(fail)?;
            worst_ulps = worst_ulps.max((now / next - 1.04).abs() / f64::EPSILON);
        }
    }
    // c/1.04^t and c/1.04^(t+1) round independently, so the ratio is exact
    // only up to a few units in the last place.
    check(
        worst_ulps <= 4.0,
        format!("unit inventories exact for 7 pollutants x 3 stages; discount ratio within {worst_ulps:.1} ulp of 1.04"),
    )
}

// ---------------------------------------------------------------- 3

fn do_nothing_neutral() -> Outcome {
    let mut env = fleet_env(0);
    for seed in 0..46 {
        env.reset(seed).map_err(fail)?;
        for t in 0..20 {
            let step = env.step(0).map_err(fail)?;
            if step.reward != 0.0 {
                return Err(format!("episode {seed}, year {}: reward {}", t + 1, step.reward));
            }
        }
        let cost = env.ledger().total_cost();
        if cost != 0.0 {
            return Err(format!("episode {seed}: total cost {cost}"));
        }
    }
    Ok("46 twenty-year episodes, every reward and cost exactly 0".into())
}

// ---------------------------------------------------------------- 4

fn squared_error(y: &[f64]) -> (f64, Vec<f64>) {
    let d = y[0] - 0.4;
    (d * d, vec![2.0 * d])
}

fn q_batch() -> Vec<Transition> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..16)
        .map(|i| Transition {
            state: (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            action: i % 4,
            reward: rng.gen_range(-1.0..1.0),
            next_state: (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            terminal: i % 5 == 0,
        })
        .collect()
}

/// Mean-squared TD error on the taken actions, with targets from a frozen
/// network, and its analytic gradient.
fn q_loss(q: &Mlp, batch: &[Transition], targets: &[f64], grads: Option<&mut pavemr_core::neural::Gradients>) -> f64 {
    let n = batch.len() as f64;
    let mut loss = 0.0;
    let mut grads = grads;
    for (t, y) in batch.iter().zip(targets) {
        let cache = q.forward(&t.state).unwrap();
        let err = cache.output()[t.action] - y;
        loss += 0.5 * err * err / n;
        if let Some(g) = grads.as_deref_mut() {
            let mut out = vec![0.0; q.output_len()];
            out[t.action] = err / n;
            q.backward(&cache, &out, g).unwrap();
        }
    }
    loss
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let regression = Mlp::new(&[6, 16, 16, 1], Head::Linear, 21).map_err(fail)?;
    let x = [0.2, -1.0, 0.7, 1.5, 0.0, -0.3];
    let e_reg = grad_check(&regression, &x, squared_error, 1e-5).map_err(fail)?;

    let q = Mlp::new(&[6, 24, 24, 4], Head::Linear, 8).map_err(fail)?;
    let frozen = Mlp::new(&[6, 24, 24, 4], Head::Linear, 9).map_err(fail)?;
    let batch = q_batch();
    let refs: Vec<&Transition> = batch.iter().collect();
    let targets = td_targets(&refs, &q, &frozen, 0.9).map_err(fail)?;
    let mut qg = q.zero_gradients();
    q_loss(&q, &batch, &targets, Some(&mut qg));
    let e_q = grad_check_with(&q, &qg, 1e-6, 0, |net| Ok(q_loss(net, &batch, &targets, None))).map_err(fail)?;

    let policy = Mlp::new(&[3, 8, 4], Head::Softmax, 3).map_err(fail)?;
    let old = Mlp::new(&[3, 8, 4], Head::Softmax, 4).map_err(fail)?;
    let value = Mlp::new(&[3, 8, 1], Head::Linear, 5).map_err(fail)?;
    let observations = [[0.1, 0.4, -0.3], [0.9, -0.5, 0.2], [-0.7, 0.3, 0.6], [0.2, 0.2, 0.2]];
    let advantages = [0.8, -1.1, 0.4, -0.3];
    let samples: Vec<PpoSample<'_>> = observations
        .iter()
        .enumerate()
        .map(|(i, o)| PpoSample {
            observation: o,
            action: i % 4,
            old_log_prob: log_softmax(old.forward(o).unwrap().logits())[i % 4],
            advantage: advantages[i],
            return_: 0.5 * i as f64,
        })
        .collect();
    // A wide clip range keeps every sample on the differentiable branch.
    let cfg = PpoConfig {
        clip_range: 0.9,
        ..PpoConfig::default()
    };
    let mut pg = policy.zero_gradients();
    let mut vg = value.zero_gradients();
    clipped_loss(&policy, &value, &samples, &cfg, &mut pg, &mut vg).map_err(fail)?;
    let e_policy = grad_check_with(&policy, &pg, 1e-6, 0, |p| {
        let (mut a, mut b) = (p.zero_gradients(), value.zero_gradients());
        Ok(clipped_loss(p, &value, &samples, &cfg, &mut a, &mut b)?.total)
    })
    .map_err(fail)?;
    let e_value = grad_check_with(&value, &vg, 1e-6, 0, |v| {
        let (mut a, mut b) = (policy.zero_gradients(), v.zero_gradients());
        Ok(clipped_loss(&policy, v, &samples, &cfg, &mut a, &mut b)?.total)
    })
    .map_err(fail)?;

    let mut corrupted = qg.clone();
    corrupted.layers[0].weights.iter_mut().for_each(|w| *w *= 1.5);
    let e_bad = grad_check_with(&q, &corrupted, 1e-6, 0, |net| Ok(q_loss(net, &batch, &targets, None))).map_err(fail)?;

    let secs = start.elapsed().as_secs_f64();
    let worst = e_reg.max(e_q).max(e_policy).max(e_value);
    check(
        worst < 1e-4 && e_bad > 1e-2 && secs < 30.0,
        format!(
            "regression {e_reg:.1e}, Q {e_q:.1e}, PPO policy {e_policy:.1e}, PPO value {e_value:.1e}, corrupted {e_bad:.1e}, {secs:.2} s"
        ),
    )
}

// ---------------------------------------------------------------- 5

const CHAIN_GAMMA: f64 = 0.9;

fn chain_convergence() -> Outcome {
    let vi = value_iteration(&ChainMdp::new(20), CHAIN_GAMMA, 1e-12);

    let start = Instant::now();
    let dqn = DqnConfig {
        gamma: CHAIN_GAMMA,
        episodes: 300,
        epsilon_decay_steps: 2_000,
        warmup_steps: 200,
        batch_size: 32,
        target_sync_steps: 100,
        learning_rate: 1e-3,
        replay_capacity: 5_000,
        hidden: vec![32, 32],
        ..DqnConfig::default()
    };
    let out = train_dqn(&mut ChainMdp::new(20), dqn, 1).map_err(fail)?;
    let dqn_secs = start.elapsed().as_secs_f64();
    let dqn_policy = tabular_greedy_policy(&out.q_net, 2, ChainMdp::observe).map_err(fail)?;
    let q: Vec<f64> = (0..2)
        .map(|s| out.q_net.predict(&ChainMdp::observe(s)).map(|q| q[0]))
        .collect::<Result<_, _>>()
        .map_err(fail)?;

    let start = Instant::now();
    let ppo = PpoConfig {
        gamma: CHAIN_GAMMA,
        steps_per_executor: 32,
        minibatch_size: 32,
        iterations: 200,
        learning_rate: 1e-3,
        hidden: vec![16],
        ..PpoConfig::default()
    };
    let out = train_ppo(|_| Ok(ChainMdp::new(20)), ppo, 1).map_err(fail)?;
    let ppo_secs = start.elapsed().as_secs_f64();
    let ppo_policy = tabular_greedy_policy(&out.policy, 2, ChainMdp::observe).map_err(fail)?;

    let ok = dqn_policy == vi.policy
        && ppo_policy == vi.policy
        && q.iter().all(|v| (v - 10.0).abs() <= 0.5)
        && dqn_secs < 120.0
        && ppo_secs < 120.0;
    check(
        ok,
        format!(
            "optimal {:?}; DQN {dqn_policy:?} with q(s, A) = [{:.3}, {:.3}] in {dqn_secs:.1} s; PPO {ppo_policy:?} in {ppo_secs:.1} s",
            vi.policy, q[0], q[1]
        ),
    )
}

// ---------------------------------------------------------------- 6

fn random_series(rng: &mut ChaCha8Rng) -> IndicatorSeries {
    let mut day = 0;
    let observations = (0..rng.gen_range(2..25))
        .map(|_| {
            day += rng.gen_range(1..400);
            Observation {
                date: DayStamp(day),
                value: rng.gen_range(0.5..8.0),
            }
        })
        .collect();
    let mut actions: Vec<i32> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..day.max(1) + 1)).collect();
    actions.sort();
    actions.dedup();
    IndicatorSeries {
        segment_id: "S".into(),
        indicator: Indicator::Iri,
        observations,
        action_dates: actions.into_iter().map(DayStamp).collect(),
    }
}

/// Number of actions on or before `date`.
fn interval_of(series: &IndicatorSeries, date: DayStamp) -> usize {
    series.action_dates.iter().filter(|&&d| d <= date).count()
}

fn calibration_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut drops_kept = 0;
    for case in 0..50 {
        let series = random_series(&mut rng);
        let out = calibrate_monotone(&series).series;
        let obs = &out.observations;
        for i in 1..obs.len() {
            let same = interval_of(&series, obs[i].date) == interval_of(&series, obs[i - 1].date);
            if same && obs[i].value < obs[i - 1].value {
                return Err(format!("case {case}: decrease inside an interval at observation {i}"));
            }
            if !same {
                if obs[i].value != series.observations[i].value {
                    return Err(format!("case {case}: first value after an action was changed"));
                }
                drops_kept += 1;
            }
        }
        let again = calibrate_monotone(&out);
        if again.series != out || !again.changes.is_empty() {
            return Err(format!("case {case}: second pass changed the series"));
        }
    }
    Ok(format!("50 series, {drops_kept} post-action values left intact, idempotent"))
}

// ---------------------------------------------------------------- 7 to 9

struct CaseRun {
    rewards: Vec<f64>,
    checkpoint: Checkpoint,
    plan: PlanReport,
    seconds: f64,
}

fn case_study_run(dir: &Path) -> Result<CaseRun, String> {
    let config = RunConfig {
        output_root: dir.to_path_buf(),
        checkpoint_every: 500,
        ..RunConfig::default()
    };
    let start = Instant::now();
    let out = commands::train_agent(
        TrainStart::Fresh {
            algo: Algo::Ppo,
            seed: 0,
            config,
        },
        dir,
    )
    .map_err(fail)?;
    let seconds = start.elapsed().as_secs_f64();
    let plan = commands::plan(&out.checkpoint, &dir.join("plan")).map_err(fail)?;
    let rewards = match &out.checkpoint.agent {
        pavemr::checkpoint::AgentState::Ppo(t) => t.log().iter().map(|l| l.mean_episode_reward).collect(),
        pavemr::checkpoint::AgentState::Dqn(_) => unreachable!("trained with PPO"),
    };
    Ok(CaseRun {
        rewards,
        checkpoint: out.checkpoint,
        plan,
        seconds,
    })
}

const WINDOW: usize = 50;

/// Mean of the `WINDOW` rewards ending at 1-based iteration `i`.
fn moving_average(rewards: &[f64], i: usize) -> f64 {
    let w = &rewards[i.saturating_sub(WINDOW)..i];
    w.iter().sum::<f64>() / w.len() as f64
}

fn training_improvement(run: &CaseRun) -> Outcome {
    let n = run.rewards.len();
    let at_100 = moving_average(&run.rewards, 100);
    let quartile_start = n - n / 4;
    let ma_q = moving_average(&run.rewards, quartile_start);
    let ma_end = moving_average(&run.rewards, n);
    let delta = (ma_end - ma_q) / ma_q;
    let spread = (quartile_start..=n)
        .map(|i| moving_average(&run.rewards, i))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    check(
        n <= 2000 && ma_end > at_100 && delta.abs() < 0.05 && run.seconds < 1800.0,
        format!(
            "{n} iterations in {:.0} s; MA{WINDOW} {at_100:.3e} at 100, {ma_q:.3e} at {quartile_start}, {ma_end:.3e} at {n} \
             (final-quartile change {:+.2}%, range {:.3e}..{:.3e})",
            run.seconds,
            delta * 100.0,
            spread.0,
            spread.1
        ),
    )
}

fn plan_shape(run: &CaseRun) -> Outcome {
    let catalog = build_action_catalog();
    let plans = &run.plan.plans;
    let cheap = plans
        .iter()
        .filter(|p| p.actions[0] == 0 || catalog.get(p.actions[0] as usize).is_ok_and(|a| a.kind.is_seal_coat()))
        .count();
    let share = cheap as f64 / plans.len() as f64;
    let mut mill_then_free = 0;
    for p in plans {
        let costs = p.yearly_costs();
        let hit = (0..p.actions.len() - 1).any(|y| {
            catalog.get(p.actions[y] as usize).is_ok_and(|a| a.kind.is_mill_and_overlay()) && costs[y + 1] == 0.0
        });
        if hit {
            mill_then_free += 1;
        }
    }
    check(
        share >= 0.5 && mill_then_free >= 1,
        format!(
            "year 1: {cheap}/{} segments do nothing or seal coat ({:.0}%); {mill_then_free} plans have a zero-cost year right after a mill and overlay",
            plans.len(),
            share * 100.0
        ),
    )
}

fn sensitivity_monotone(run: &CaseRun, dir: &Path) -> Outcome {
    let cfg = SensitivityConfig {
        checkpoint: dir.join("final.json"),
        output_root: dir.to_path_buf(),
        retrain: false,
        sensitivity: Default::default(),
    };
    let rows = commands::run_sensitivity(&cfg, &run.checkpoint, &dir.join("sensitivity")).map_err(fail)?;
    let (inversions, within) = sensitivity_inversions(&rows);
    let means: Vec<String> = rows
        .iter()
        .map(|r| format!("{}x {:.3e}±{:.1e}", r.multiplier, r.mean_final_effcost, r.std_final_effcost))
        .collect();
    let reps = rows.iter().map(|r| r.replications).min().unwrap_or(0);
    check(
        reps >= 5 && (inversions == 0 || (inversions == 1 && within)),
        format!("{reps} replications, {inversions} inversions; {}", means.join(", ")),
    )
}

// ---------------------------------------------------------------- 10

fn short_run(algo: Algo, dir: &Path) -> Result<(), String> {
    let mut config = RunConfig {
        output_root: dir.to_path_buf(),
        checkpoint_every: 5,
        ..RunConfig::default()
    };
    config.ppo.iterations = 12;
    config.dqn.episodes = 12;
    let out = commands::train_agent(TrainStart::Fresh { algo, seed: 7, config }, dir).map_err(fail)?;
    commands::plan(&out.checkpoint, &dir.join("plan")).map_err(fail)?;
    Ok(())
}

fn files_under(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn reproducibility(root: &Path) -> Outcome {
    let mut compared = 0;
    for algo in [Algo::Ppo, Algo::Dqn] {
        // Both runs write to the same path so that paths echoed into the
        // outputs agree.
        let dir = root.join(algo.name());
        short_run(algo, &dir).map_err(|e| format!("{} first run: {e}", algo.name()))?;
        let first: Vec<_> = files_under(&dir)
            .into_iter()
            .map(|f| {
                let bytes = std::fs::read(dir.join(&f)).unwrap();
                (f, bytes)
            })
            .collect();
        std::fs::remove_dir_all(&dir).map_err(fail)?;
        short_run(algo, &dir).map_err(|e| format!("{} second run: {e}", algo.name()))?;
        let second = files_under(&dir);
        if second.len() != first.len() {
            return Err(format!("{}: {} files, then {}", algo.name(), first.len(), second.len()));
        }
        for (f, bytes) in &first {
            if std::fs::read(dir.join(f)).map_err(fail)? != *bytes {
                return Err(format!("{}: {} differs between runs", algo.name(), f.display()));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} files byte-identical across PPO and DQN reruns, including logs, checkpoints and plan reports"))
}

// ----------------------------------------------------------------

fn report(number: u32, name: &str, outcome: Outcome) -> bool {
    let (tag, detail, ok) = match outcome {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{tag} {number:>2} {name}: {detail}");
    ok
}

fn main() {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let mut ok = true;
    ok &= report(1, "reward ledger matches brute-force recomputation", reward_oracle());
    ok &= report(2, "GWP factors and discounting", gwp_and_discount());
    ok &= report(3, "all-DoNothing episodes are neutral", do_nothing_neutral());
    ok &= report(4, "finite-difference gradient checks", gradients());
    ok &= report(5, "chain MDP convergence", chain_convergence());
    ok &= report(6, "monotone calibration contract", calibration_contract());

    let case_dir = scratch.path().join("case-study");
    match case_study_run(&case_dir) {
        Ok(run) => {
            ok &= report(7, "training improves and plateaus", training_improvement(&run));
            ok &= report(8, "plan shape", plan_shape(&run));
            ok &= report(9, "traffic sensitivity is monotone", sensitivity_monotone(&run, &case_dir));
        }
        Err(e) => {
            for (n, name) in [(7, "training improves and plateaus"), (8, "plan shape"), (9, "traffic sensitivity is monotone")] {
                ok &= report(n, name, Err(format!("case-study training failed: {e}")));
            }
        }
    }
    ok &= report(10, "identical seeds reproduce byte-identical outputs", reproducibility(&scratch.path().join("repro")));

    if !ok {
        std::process::exit(1);
    }
}
