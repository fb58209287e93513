//! Experiment orchestration: the case-study fleet, plan reports, traffic
//! sensitivity and the PPO/DQN comparison.

mod compare;

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{greedy_plan, Plan, Policy, PpoConfig};
use crate::domain::{
    build_action_catalog, ClimateProfile, FreezeZone, Layer, MoistureZone, SegmentState,
    StructureProfile, TrafficProfile, TreatmentKind, Vocabulary,
};
use crate::envmodel::{EnvironmentConfig, EpisodeSetup, InitialStateSampler, MaintenanceEnv};
use crate::error::{Error, Result};
use crate::math;
use crate::rewardlca::CostCatalog;

pub use compare::{compare_agents, AgentSummary, CompareSpec, ComparisonReport, CurvePoint};

/// Inclusive `[lo, hi]` range sampled uniformly per segment.
pub type Span = (f64, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaseStudyConfig {
    pub segment_count: usize,
    pub segment_length_m: f64,
    pub lane_width_m: f64,
    pub lanes: u32,
    pub freeze: FreezeZone,
    pub moisture: MoistureZone,
    pub horizon_years: u32,
    pub start_year: i32,
    pub initial_iri: Span,
    pub initial_rd: Span,
    pub initial_age_years: Span,
    pub annual_aadt: Span,
    pub truck_ratio: Span,
    pub annual_esal: Span,
    pub annual_precipitation: Span,
    pub freeze_thaw_cycles: Span,
}

impl Default for CaseStudyConfig {
    fn default() -> Self {
        Self {
            segment_count: 46,
            segment_length_m: 500.0,
            lane_width_m: 3.66,
            lanes: 6,
            freeze: FreezeZone::Freeze,
            moisture: MoistureZone::Wet,
            horizon_years: 20,
            start_year: 2021,
            initial_iri: (0.9, 1.4),
            initial_rd: (2.0, 5.0),
            initial_age_years: (1.0, 6.0),
            annual_aadt: (55_000.0, 70_000.0),
            truck_ratio: (0.12, 0.2),
            annual_esal: (1.5e6, 2.5e6),
            annual_precipitation: (1000.0, 1300.0),
            freeze_thaw_cycles: (30.0, 60.0),
        }
    }
}

impl CaseStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_count < 1 || self.lanes < 1 || self.horizon_years < 1 {
            return Err(Error::config("segment count, lanes and horizon must be >= 1"));
        }
        if !(self.segment_length_m > 0.0) || !(self.lane_width_m > 0.0) {
            return Err(Error::config("segment length and lane width must be positive"));
        }
        let spans = [
            self.initial_iri,
            self.initial_rd,
            self.initial_age_years,
            self.annual_aadt,
            self.truck_ratio,
            self.annual_esal,
            self.annual_precipitation,
            self.freeze_thaw_cycles,
        ];
        if spans.iter().any(|&(lo, hi)| !(lo <= hi) || lo < 0.0) {
            return Err(Error::config("case-study ranges must satisfy 0 <= lo <= hi"));
        }
        if self.initial_iri.0 <= 0.0 || self.truck_ratio.1 > 1.0 {
            return Err(Error::config("initial iri must be > 0 and truck ratio <= 1"));
        }
        Ok(())
    }

    /// Paved area of one segment in m².
    pub fn segment_area_m2(&self) -> f64 {
        self.segment_length_m * self.lane_width_m * self.lanes as f64
    }

    pub fn total_length_km(&self) -> f64 {
        self.segment_count as f64 * self.segment_length_m / 1000.0
    }
}

/// Multiplier applied to case-study rewards during training. A 20-year plan's
/// final effcost is of order 1e-5 with the placeholder costs.
pub const CASE_STUDY_REWARD_SCALE: f64 = 1e5;

/// PPO settings for the case study: library defaults with 2000 iterations
/// and [`CASE_STUDY_REWARD_SCALE`].
pub fn case_study_ppo_config() -> PpoConfig {
    PpoConfig {
        iterations: 2000,
        reward_scale: CASE_STUDY_REWARD_SCALE,
        ..PpoConfig::default()
    }
}

/// Parametric environment whose episodes start from segments of `fleet`,
/// priced with the placeholder catalog for the case-study segment area.
pub fn case_study_env(cfg: &CaseStudyConfig, fleet: &[SegmentState]) -> Result<MaintenanceEnv> {
    let environment = EnvironmentConfig {
        horizon_years: cfg.horizon_years,
        ..EnvironmentConfig::default()
    };
    let setup = EpisodeSetup::new(
        environment,
        CostCatalog::placeholder(cfg.segment_area_m2()),
        InitialStateSampler::Fleet {
            segments: fleet.to_vec(),
        },
    );
    MaintenanceEnv::new(setup, None)
}

/// The reference pavement structure of the case-study highway.
pub fn case_study_structure(vocab: &Vocabulary) -> Result<StructureProfile> {
    let layer = |kind: &str, mm: f64, material: &str| -> Result<Layer> {
        Ok(Layer {
            kind: vocab.layer_type(kind)?,
            thickness_mm: mm,
            material: vocab.material(material)?,
        })
    };
    Ok(StructureProfile {
        surface: layer("AC", 50.0, "AC-20")?,
        binder: layer("AC", 75.0, "PG-64-22")?,
        base: layer("GB", 250.0, "CRUSHED-STONE")?,
        subbase: layer("GS", 200.0, "GRAVEL")?,
    })
}

/// Samples the case-study fleet; the same seed always gives the same fleet.
pub fn generate_case_study(cfg: &CaseStudyConfig, seed: u64) -> Result<Vec<SegmentState>> {
    cfg.validate()?;
    let structure = case_study_structure(&Vocabulary::standard())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): Span| if lo < hi { rng.gen_range(lo..=hi) } else { lo };
    let fleet = (0..cfg.segment_count)
        .map(|_| {
            let truck_ratio = draw(cfg.truck_ratio);
            let annual_aadt = draw(cfg.annual_aadt);
            let annual_esal = draw(cfg.annual_esal);
            let annual_precipitation = draw(cfg.annual_precipitation);
            let freeze_thaw_cycles = draw(cfg.freeze_thaw_cycles);
            SegmentState {
                structure,
                traffic: TrafficProfile {
                    truck_ratio,
                    annual_esal,
                    annual_aadt,
                },
                climate: ClimateProfile {
                    annual_precipitation,
                    freeze_thaw_cycles,
                    freeze: cfg.freeze,
                    moisture: cfg.moisture,
                },
                iri: draw(cfg.initial_iri),
                rd: draw(cfg.initial_rd),
                age_years: draw(cfg.initial_age_years),
                calendar_year: cfg.start_year,
            }
        })
        .collect();
    Ok(fleet)
}

/// Calendar label of plan year `year` (1-based): year 1 is the year after
/// the start year.
pub fn calendar_label(start_year: i32, year: u32) -> i32 {
    start_year + year as i32
}

/// Fleet-level summary of greedy plans.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub plans: Vec<Plan>,
    /// Per year, percent of segments per treatment kind in
    /// [`TreatmentKind::REPORT_ORDER`].
    pub distribution: Vec<[f64; 8]>,
    /// Per year, discounted cost summed over the fleet.
    pub yearly_cost: Vec<f64>,
}

impl PlanReport {
    /// Discounted cost per year of one segment.
    pub fn segment_costs(&self, segment: usize) -> Option<Vec<f64>> {
        self.plans.get(segment).map(Plan::yearly_costs)
    }

    pub fn mean_final_effcost(&self) -> f64 {
        let v: Vec<f64> = self.plans.iter().map(Plan::final_effcost).collect();
        math::mean(&v)
    }
}

/// Greedy plans for every segment of `fleet` and their yearly summaries.
pub fn plan_report<P: Policy + ?Sized>(
    policy: &mut P,
    env: &mut MaintenanceEnv,
    fleet: &[SegmentState],
    horizon: u32,
) -> Result<PlanReport> {
    if fleet.is_empty() {
        return Err(Error::config("plan report needs at least one segment"));
    }
    let plans: Vec<Plan> = fleet
        .iter()
        .map(|s| greedy_plan(policy, env, s, horizon))
        .collect::<Result<_>>()?;
    let catalog = build_action_catalog();
    let n = fleet.len() as f64;
    let mut distribution = alloc::vec![[0.0; 8]; horizon as usize];
    let mut yearly_cost = alloc::vec![0.0; horizon as usize];
    for plan in &plans {
        for (year, (&a, entry)) in plan.actions.iter().zip(plan.ledger.entries()).enumerate() {
            let kind = catalog.get(a as usize)?.kind;
            let col = TreatmentKind::REPORT_ORDER
                .iter()
                .position(|&k| k == kind)
                .expect("every kind is reported");
            distribution[year][col] += 1.0;
            yearly_cost[year] += entry.discounted_cost;
        }
    }
    distribution.iter_mut().flatten().for_each(|c| *c = *c * 100.0 / n);
    Ok(PlanReport {
        plans,
        distribution,
        yearly_cost,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivitySpec {
    /// Traffic multipliers; 1.0 is always added as the reference row.
    pub multipliers: Vec<f64>,
    pub replications: u32,
    pub seed: u64,
}

impl Default for SensitivitySpec {
    fn default() -> Self {
        Self {
            multipliers: alloc::vec![1.5, 2.0, 2.5, 3.0, 3.5],
            replications: 5,
            seed: 0,
        }
    }
}

impl SensitivitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.multipliers.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::config("traffic multipliers must be positive"));
        }
        if self.replications < 1 {
            return Err(Error::config("at least one replication is required"));
        }
        Ok(())
    }

    /// Multipliers in ascending order with 1.0 included once.
    pub fn effective_multipliers(&self) -> Vec<f64> {
        let mut m = self.multipliers.clone();
        if !m.contains(&1.0) {
            m.push(1.0);
        }
        m.sort_by(f64::total_cmp);
        m.dedup();
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub multiplier: f64,
    pub mean_final_effcost: f64,
    pub std_final_effcost: f64,
    pub replications: u32,
}

/// Copy of `fleet` with AADT and ESAL multiplied by `m`; every other field
/// is untouched.
pub fn scale_traffic(fleet: &[SegmentState], m: f64) -> Vec<SegmentState> {
    fleet
        .iter()
        .map(|s| {
            let mut s = *s;
            s.traffic.annual_aadt *= m;
            s.traffic.annual_esal *= m;
            s
        })
        .collect()
}

/// Mean and standard deviation of fleet-mean final effcost per traffic
/// multiplier. Replication `r` uses the fleet generated with `spec.seed + r`;
/// `policy_for` supplies the policy for a multiplier, either a shared trained
/// one or one retrained under that traffic.
pub fn sensitivity<P, F>(
    spec: &SensitivitySpec,
    case: &CaseStudyConfig,
    env: &mut MaintenanceEnv,
    mut policy_for: F,
) -> Result<Vec<SensitivityRow>>
where
    P: Policy,
    F: FnMut(f64) -> Result<P>,
{
    spec.validate()?;
    let mut rows = Vec::new();
    for m in spec.effective_multipliers() {
        let mut policy = policy_for(m)?;
        let mut per_rep = Vec::with_capacity(spec.replications as usize);
        for r in 0..spec.replications {
            let fleet = scale_traffic(&generate_case_study(case, spec.seed.wrapping_add(r as u64))?, m);
            let report = plan_report(&mut policy, env, &fleet, case.horizon_years)?;
            per_rep.push(report.mean_final_effcost());
        }
        rows.push(SensitivityRow {
            multiplier: m,
            mean_final_effcost: math::mean(&per_rep),
            std_final_effcost: math::std_dev(&per_rep),
            replications: spec.replications,
        });
    }
    Ok(rows)
}

/// Counts adjacent pairs where the mean rises; an inversion is tolerated if
/// the rise is within one standard deviation of either row.
pub fn sensitivity_inversions(rows: &[SensitivityRow]) -> (usize, bool) {
    let mut count = 0;
    let mut within_std = true;
    for w in rows.windows(2) {
        let rise = w[1].mean_final_effcost - w[0].mean_final_effcost;
        if rise > 0.0 {
            count += 1;
            if rise > w[0].std_final_effcost.max(w[1].std_final_effcost) {
                within_std = false;
            }
        }
    }
    (count, within_std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::RandomPolicy;
    use crate::domain::CategoryCode;

    fn env(fleet: &[SegmentState]) -> MaintenanceEnv {
        case_study_env(&CaseStudyConfig::default(), fleet).unwrap()
    }

    struct Always(usize);

    impl Policy for Always {
        fn select(&mut self, _: &[f64]) -> Result<usize> {
            Ok(self.0)
        }
    }

    #[test]
    fn default_case_study_geometry() {
        let cfg = CaseStudyConfig::default();
        let fleet = generate_case_study(&cfg, 1).unwrap();
        assert_eq!(fleet.len(), 46);
        assert!((cfg.total_length_km() - 23.0).abs() < 1e-12);
        assert!(fleet
            .iter()
            .all(|s| s.climate.freeze == FreezeZone::Freeze && s.climate.moisture == MoistureZone::Wet));
        assert_eq!(fleet, generate_case_study(&cfg, 1).unwrap());
        assert_ne!(fleet, generate_case_study(&cfg, 2).unwrap());
    }

    #[test]
    fn distribution_rows_close_to_100() {
        let fleet = generate_case_study(&CaseStudyConfig::default(), 0).unwrap();
        let mut e = env(&fleet);
        let report = plan_report(&mut RandomPolicy::new(32, 1), &mut e, &fleet, 20).unwrap();
        assert_eq!(report.distribution.len(), 20);
        for row in &report.distribution {
            assert!((row.iter().sum::<f64>() - 100.0).abs() < 0.5);
        }
        assert_eq!(report.segment_costs(3).unwrap().len(), 20);
    }

    #[test]
    fn do_nothing_policy_costs_nothing() {
        let fleet = generate_case_study(&CaseStudyConfig::default(), 0).unwrap();
        let mut e = env(&fleet);
        let report = plan_report(&mut Always(0), &mut e, &fleet, 20).unwrap();
        assert!(report.yearly_cost.iter().all(|&c| c == 0.0));
        assert!(report.distribution.iter().all(|r| r[7] > 99.999));
    }

    #[test]
    fn traffic_scaling_touches_only_traffic_volume() {
        let fleet = generate_case_study(&CaseStudyConfig::default(), 0).unwrap();
        let scaled = scale_traffic(&fleet, 2.5);
        for (a, b) in fleet.iter().zip(&scaled) {
            assert_eq!(b.traffic.annual_aadt, a.traffic.annual_aadt * 2.5);
            assert_eq!(b.traffic.annual_esal, a.traffic.annual_esal * 2.5);
            let mut c = *b;
            c.traffic.annual_aadt = a.traffic.annual_aadt;
            c.traffic.annual_esal = a.traffic.annual_esal;
            assert_eq!(&c, a);
        }
    }

    #[test]
    fn sensitivity_includes_reference_row_and_is_deterministic() {
        let case = CaseStudyConfig {
            segment_count: 4,
            ..Default::default()
        };
        let fleet = generate_case_study(&case, 0).unwrap();
        let mut e = env(&fleet);
        let spec = SensitivitySpec {
            multipliers: alloc::vec![2.0],
            replications: 1,
            seed: 7,
        };
        let a = sensitivity(&spec, &case, &mut e, |_| Ok(Always(30))).unwrap();
        let b = sensitivity(&spec, &case, &mut e, |_| Ok(Always(30))).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.multiplier).collect::<Vec<_>>(), alloc::vec![1.0, 2.0]);
    }

    #[test]
    fn inversion_counting() {
        let row = |m, mean, std| SensitivityRow {
            multiplier: m,
            mean_final_effcost: mean,
            std_final_effcost: std,
            replications: 5,
        };
        let rows = [row(1.0, 3.0, 0.1), row(1.5, 2.5, 0.1), row(2.0, 2.55, 0.1), row(2.5, 2.0, 0.1)];
        assert_eq!(sensitivity_inversions(&rows), (1, true));
        let rows = [row(1.0, 3.0, 0.1), row(1.5, 4.0, 0.1)];
        assert_eq!(sensitivity_inversions(&rows), (1, false));
    }

    #[test]
    fn calendar_labels_start_after_the_start_year() {
        assert_eq!(calendar_label(2021, 1), 2022);
        assert_eq!(calendar_label(2021, 20), 2041);
    }

    #[test]
    fn structure_uses_standard_codes() {
        assert_eq!(case_study_structure(&Vocabulary::standard()).unwrap().surface.kind, CategoryCode(1));
    }
}
