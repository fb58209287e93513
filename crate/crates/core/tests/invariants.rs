use pavemr_core::dataprep::{calibrate_monotone, DayStamp, Indicator, IndicatorSeries, Observation};
use pavemr_core::domain::{
    build_action_catalog, classify_condition, encode_agent_state, ConditionBands, SegmentState, StateEncoder,
    Vocabulary,
};
use pavemr_core::envmodel::{default_agent_ranges, EnvironmentConfig, IndicatorCaps, Simulator};
use pavemr_core::runner::{generate_case_study, CaseStudyConfig};
use proptest::prelude::*;

fn case_segment(seed: u64, index: usize) -> SegmentState {
    generate_case_study(&CaseStudyConfig::default(), seed).unwrap()[index % 46]
}

fn series_strategy() -> impl Strategy<Value = IndicatorSeries> {
    (
        proptest::collection::vec((1i32..400, 0.5f64..8.0), 2..25),
        proptest::collection::vec(0i32..9000, 0..4),
    )
        .prop_map(|(steps, mut actions)| {
            let mut day = 0;
            let observations = steps
                .into_iter()
                .map(|(gap, value)| {
                    day += gap;
                    Observation {
                        date: DayStamp(day),
                        value,
                    }
                })
                .collect();
            actions.sort();
            IndicatorSeries {
                segment_id: "S".into(),
                indicator: Indicator::Iri,
                observations,
                action_dates: actions.into_iter().map(DayStamp).collect(),
            }
        })
}

fn interval_of(series: &IndicatorSeries, date: DayStamp) -> usize {
    series.action_dates.iter().filter(|&&d| d <= date).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn calibration_contract(series in series_strategy()) {
        let out = calibrate_monotone(&series).series;
        let obs = &out.observations;
        for i in 1..obs.len() {
            let same = interval_of(&series, obs[i].date) == interval_of(&series, obs[i - 1].date);
            if same {
                prop_assert!(obs[i].value >= obs[i - 1].value);
            } else {
                prop_assert_eq!(obs[i].value, series.observations[i].value);
            }
        }
        for (a, b) in obs.iter().zip(&series.observations) {
            prop_assert!(a.value >= b.value);
            prop_assert_eq!(a.date, b.date);
        }
        prop_assert_eq!(&calibrate_monotone(&out).series, &out);
        prop_assert!(calibrate_monotone(&out).changes.is_empty());
    }

    #[test]
    fn do_nothing_strictly_worsens_until_caps(seed in any::<u64>(), i in 0usize..46) {
        let sim = Simulator::parametric(EnvironmentConfig::default()).unwrap();
        let caps = sim.config().caps;
        let mut s = case_segment(seed, i);
        for _ in 0..30 {
            let n = sim.step(&s, 0).unwrap();
            prop_assert!(n.iri > s.iri || n.iri == caps.iri_max);
            prop_assert!(n.rd > s.rd || n.rd == caps.rd_max);
            s = n;
        }
    }

    #[test]
    fn treatments_never_worsen_indicators(seed in any::<u64>(), i in 0usize..46, years in 0u32..15, a in 1usize..32) {
        let sim = Simulator::parametric(EnvironmentConfig::default()).unwrap();
        let mut s = case_segment(seed, i);
        for _ in 0..years {
            s = sim.step(&s, 0).unwrap();
        }
        let idle = sim.step(&s, 0).unwrap();
        let treated = sim.step(&s, a).unwrap();
        prop_assert!(treated.iri <= idle.iri);
        prop_assert!(treated.rd <= idle.rd);
    }

    #[test]
    fn step_is_pure(seed in any::<u64>(), a in 0usize..32) {
        let sim = Simulator::parametric(EnvironmentConfig::default()).unwrap();
        let s = case_segment(seed, 0);
        prop_assert_eq!(sim.step(&s, a).unwrap(), sim.step(&s, a).unwrap());
    }

    #[test]
    fn encoding_is_monotone_in_numeric_inputs(seed in any::<u64>(), field in 0usize..7, bump in 0.0f64..5.0) {
        let enc = StateEncoder::from_ranges(&Vocabulary::standard(), &default_agent_ranges(&IndicatorCaps::default()));
        let s = case_segment(seed, 5);
        let mut t = s;
        match field {
            0 => t.iri += bump,
            1 => t.rd += bump,
            2 => t.traffic.annual_esal *= 1.0 + bump,
            3 => t.traffic.annual_aadt *= 1.0 + bump,
            4 => t.climate.annual_precipitation += bump * 100.0,
            5 => t.climate.freeze_thaw_cycles += bump * 10.0,
            _ => t.structure.surface.thickness_mm += bump * 10.0,
        }
        let (a, b) = (encode_agent_state(&s, &enc).unwrap(), encode_agent_state(&t, &enc).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(y >= x);
        }
    }

    #[test]
    fn condition_label_is_monotone(iri in 0.3f64..6.0, rd in 0.0f64..30.0, di in 0.0f64..3.0, dr in 0.0f64..10.0) {
        let bands = ConditionBands::default();
        let mut s = case_segment(0, 0);
        s.iri = iri;
        s.rd = rd;
        let before = classify_condition(&s, &bands);
        s.iri += di;
        s.rd += dr;
        prop_assert!(classify_condition(&s, &bands) >= before);
    }
}

#[test]
fn catalog_rebuild_is_identical() {
    assert_eq!(build_action_catalog(), build_action_catalog());
}
