//! Preparation of indicator histories for surrogate training: categorical
//! encoding, min-max scaling, missing-value repair, monotone calibration of
//! indicator series between maintenance actions, and assembly of the 40-input
//! training pairs.

mod calibrate;
mod impute;
mod normalize;
mod pairs;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::{ClimateProfile, FreezeZone, MoistureZone, StructureProfile, TrafficProfile};
use crate::error::{Error, Result};

pub use calibrate::{calibrate_dataset, calibrate_monotone, CalibrationChange, CalibrationOutcome, DatasetChange};
pub use impute::{impute, impute_at, impute_dataset, ImputationConfig, ImputePolicy, ImputeReport, Imputed};
pub use normalize::{minmax_apply, minmax_invert, FeatureRange, NormalizationParams};
pub use pairs::{
    assemble_surrogate_input, build_training_pairs, PairBuild, SurrogateInputs, TrainingPair, SURROGATE_INPUTS,
    SURROGATE_INPUT_NAMES,
};

pub const DAYS_PER_YEAR: f64 = 365.25;

/// Calendar date as days since 1970-01-01.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DayStamp(pub i32);

impl DayStamp {
    /// Fractional years elapsed since January 1st of `epoch_year`.
    pub fn years_since(self, epoch_year: i32) -> f64 {
        self.0 as f64 / DAYS_PER_YEAR + 1970.0 - epoch_year as f64
    }

    pub fn years_between(self, later: DayStamp) -> f64 {
        (later.0 - self.0) as f64 / DAYS_PER_YEAR
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Indicator {
    Iri,
    Rd,
}

impl Indicator {
    pub const ALL: [Indicator; 2] = [Indicator::Iri, Indicator::Rd];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Iri => "IRI",
            Indicator::Rd => "RD",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Indicator::Iri => 0,
            Indicator::Rd => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: DayStamp,
    pub value: f64,
}

/// Time-ordered history of one indicator on one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSeries {
    pub segment_id: String,
    pub indicator: Indicator,
    pub observations: Vec<Observation>,
    pub action_dates: Vec<DayStamp>,
}

impl IndicatorSeries {
    pub fn validate(&self) -> Result<()> {
        for w in self.observations.windows(2) {
            if w[1].date <= w[0].date {
                return Err(Error::validation("observation dates must be strictly increasing"));
            }
        }
        for w in self.action_dates.windows(2) {
            if w[1] < w[0] {
                return Err(Error::validation("action dates must be time-ordered"));
            }
        }
        if self.observations.iter().any(|o| !(o.value >= 0.0) || !o.value.is_finite()) {
            return Err(Error::validation("indicator values must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }
}

/// Encodes each code as a one-hot row over `vocabulary`.
pub fn one_hot<S: AsRef<str>, V: AsRef<str>>(codes: &[S], vocabulary: &[V]) -> Result<Vec<Vec<f64>>> {
    codes
        .iter()
        .map(|c| {
            let c = c.as_ref();
            let pos = vocabulary
                .iter()
                .position(|v| v.as_ref() == c)
                .ok_or_else(|| Error::UnknownCode {
                    field: String::from("one_hot"),
                    code: String::from(c),
                })?;
            let mut row = alloc::vec![0.0; vocabulary.len()];
            row[pos] = 1.0;
            Ok(row)
        })
        .collect()
}

/// A maintenance action recorded on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEvent {
    pub date: DayStamp,
    pub action_id: u8,
}

/// One ingested row before missing-value repair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSnapshot {
    pub date: DayStamp,
    pub iri: Option<f64>,
    pub rd: Option<f64>,
    pub truck_ratio: Option<f64>,
    pub annual_esal: Option<f64>,
    pub annual_aadt: Option<f64>,
    pub annual_precipitation: Option<f64>,
    pub freeze_thaw_cycles: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSegment {
    pub segment_id: String,
    pub structure: StructureProfile,
    pub freeze: FreezeZone,
    pub moisture: MoistureZone,
    pub snapshots: Vec<RawSnapshot>,
    pub actions: Vec<ActionEvent>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawDataset {
    pub segments: Vec<RawSegment>,
}

/// A fully populated observation row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub date: DayStamp,
    pub iri: f64,
    pub rd: f64,
    pub traffic: TrafficProfile,
    pub annual_precipitation: f64,
    pub freeze_thaw_cycles: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentHistory {
    pub segment_id: String,
    pub structure: StructureProfile,
    pub freeze: FreezeZone,
    pub moisture: MoistureZone,
    pub snapshots: Vec<Snapshot>,
    pub actions: Vec<ActionEvent>,
}

impl SegmentHistory {
    pub fn climate_at(&self, snapshot: &Snapshot) -> ClimateProfile {
        ClimateProfile {
            annual_precipitation: snapshot.annual_precipitation,
            freeze_thaw_cycles: snapshot.freeze_thaw_cycles,
            freeze: self.freeze,
            moisture: self.moisture,
        }
    }

    pub fn series(&self, indicator: Indicator) -> IndicatorSeries {
        IndicatorSeries {
            segment_id: self.segment_id.clone(),
            indicator,
            observations: self
                .snapshots
                .iter()
                .map(|s| Observation {
                    date: s.date,
                    value: match indicator {
                        Indicator::Iri => s.iri,
                        Indicator::Rd => s.rd,
                    },
                })
                .collect(),
            action_dates: self.actions.iter().map(|a| a.date).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub segments: Vec<SegmentHistory>,
}
