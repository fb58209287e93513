use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Dataset, DayStamp, Indicator, IndicatorSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationChange {
    pub index: usize,
    pub date: DayStamp,
    pub original: f64,
    pub calibrated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOutcome {
    pub series: IndicatorSeries,
    pub changes: Vec<CalibrationChange>,
}

/// Enforces non-decreasing values between maintenance actions.
///
/// Observations are split into intervals by the action dates; an observation
/// dated on an action day belongs to the interval that action opens, so it may
/// drop. Inside an interval, any value below the running maximum is raised to
/// it. Values that already satisfy the constraint are copied untouched.
pub fn calibrate_monotone(series: &IndicatorSeries) -> CalibrationOutcome {
    let mut out = series.clone();
    let mut changes = Vec::new();
    let mut interval = usize::MAX;
    let mut running_max = f64::NEG_INFINITY;
    for (index, obs) in out.observations.iter_mut().enumerate() {
        let this_interval = series.action_dates.iter().filter(|&&d| d <= obs.date).count();
        if this_interval != interval {
            interval = this_interval;
            running_max = obs.value;
            continue;
        }
        if obs.value < running_max {
            changes.push(CalibrationChange {
                index,
                date: obs.date,
                original: obs.value,
                calibrated: running_max,
            });
            obs.value = running_max;
        } else {
            running_max = obs.value;
        }
    }
    CalibrationOutcome { series: out, changes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetChange {
    pub segment_id: String,
    pub indicator: Indicator,
    pub date: DayStamp,
    pub original: f64,
    pub calibrated: f64,
}

/// Calibrates both indicators of every segment in place.
pub fn calibrate_dataset(dataset: &mut Dataset) -> Vec<DatasetChange> {
    let mut report = Vec::new();
    for seg in &mut dataset.segments {
        for indicator in Indicator::ALL {
            let outcome = calibrate_monotone(&seg.series(indicator));
            for c in &outcome.changes {
                let snap = &mut seg.snapshots[c.index];
                match indicator {
                    Indicator::Iri => snap.iri = c.calibrated,
                    Indicator::Rd => snap.rd = c.calibrated,
                }
                report.push(DatasetChange {
                    segment_id: seg.segment_id.clone(),
                    indicator,
                    date: c.date,
                    original: c.original,
                    calibrated: c.calibrated,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::super::Observation;
    use super::*;
    use alloc::vec;

    fn series(values: &[f64], actions: &[i32]) -> IndicatorSeries {
        IndicatorSeries {
            segment_id: "seg".into(),
            indicator: Indicator::Iri,
            observations: values
                .iter()
                .enumerate()
                .map(|(i, &v)| Observation { date: DayStamp(365 * i as i32), value: v })
                .collect(),
            action_dates: actions.iter().map(|&d| DayStamp(d)).collect(),
        }
    }

    #[test]
    fn running_max_without_actions() {
        let out = calibrate_monotone(&series(&[2.0, 2.2, 2.1, 2.5], &[]));
        assert_eq!(out.series.values(), vec![2.0, 2.2, 2.2, 2.5]);
        assert_eq!(out.changes.len(), 1);
        assert_eq!(out.changes[0].index, 2);
        assert_eq!(out.changes[0].original, 2.1);
    }

    #[test]
    fn drop_after_action_is_kept() {
        let out = calibrate_monotone(&series(&[2.5, 1.0], &[200]));
        assert_eq!(out.series.values(), vec![2.5, 1.0]);
        assert!(out.changes.is_empty());
    }

    #[test]
    fn observation_on_action_date_may_drop() {
        let out = calibrate_monotone(&series(&[2.5, 1.0, 0.9, 1.4], &[365]));
        assert_eq!(out.series.values(), vec![2.5, 1.0, 1.0, 1.4]);
    }

    #[test]
    fn already_monotone_is_untouched() {
        let s = series(&[1.0, 1.0, 1.3, 2.0], &[]);
        let out = calibrate_monotone(&s);
        assert_eq!(out.series, s);
        assert!(out.changes.is_empty());
    }

    #[test]
    fn idempotent() {
        let s = series(&[3.0, 2.0, 2.5, 1.0, 1.2, 0.8, 4.0], &[1000]);
        let once = calibrate_monotone(&s).series;
        let twice = calibrate_monotone(&once);
        assert_eq!(twice.series, once);
        assert!(twice.changes.is_empty());
    }
}
