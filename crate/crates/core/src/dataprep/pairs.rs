use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Dataset, Indicator};
use crate::domain::{build_action_catalog, ClimateProfile, MaintenanceAction, StructureProfile, TrafficProfile};
use crate::error::{Error, Result};
use crate::math;

/// Width of the surrogate input vector.
pub const SURROGATE_INPUTS: usize = 40;

/// Column names of the surrogate input, in order.
///
/// Structure: each of the 12 layer attributes as a (value, present) pair.
/// Traffic: the three profile fields plus truck volume, log-ESAL and ESAL
/// accumulated over the interval. Weather: precipitation, freeze-thaw cycles
/// and the two zone flags. Maintenance: treatment ordinal, thickness and
/// material ordinal (all zero without an action) and the action date in years
/// since the configured epoch.
pub const SURROGATE_INPUT_NAMES: [&str; SURROGATE_INPUTS] = [
    "surface_type",
    "surface_type_present",
    "surface_thickness_mm",
    "surface_thickness_present",
    "surface_material",
    "surface_material_present",
    "binder_type",
    "binder_type_present",
    "binder_thickness_mm",
    "binder_thickness_present",
    "binder_material",
    "binder_material_present",
    "base_type",
    "base_type_present",
    "base_thickness_mm",
    "base_thickness_present",
    "base_material",
    "base_material_present",
    "subbase_type",
    "subbase_type_present",
    "subbase_thickness_mm",
    "subbase_thickness_present",
    "subbase_material",
    "subbase_material_present",
    "truck_ratio",
    "annual_esal",
    "annual_aadt",
    "truck_aadt",
    "log_esal_millions",
    "interval_esal",
    "annual_precipitation_mm",
    "freeze_thaw_cycles",
    "freeze_flag",
    "moisture_flag",
    "initial_indicator",
    "interval_years",
    "maintenance_kind",
    "maintenance_thickness_mm",
    "maintenance_material",
    "maintenance_date",
];

pub struct SurrogateInputs<'a> {
    pub structure: &'a StructureProfile,
    pub traffic: &'a TrafficProfile,
    pub climate: &'a ClimateProfile,
    pub initial: f64,
    pub interval_years: f64,
    /// `None` and do-nothing both encode as "no action".
    pub action: Option<&'a MaintenanceAction>,
    pub action_years_since_epoch: f64,
}

pub fn assemble_surrogate_input(inp: &SurrogateInputs<'_>) -> [f64; SURROGATE_INPUTS] {
    let mut x = [0.0; SURROGATE_INPUTS];
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    for (i, layer) in inp.structure.layers().iter().enumerate() {
        let o = 6 * i;
        x[o] = layer.kind.0 as f64;
        x[o + 1] = flag(layer.kind.0 != 0);
        x[o + 2] = layer.thickness_mm;
        x[o + 3] = flag(layer.thickness_mm > 0.0);
        x[o + 4] = layer.material.0 as f64;
        x[o + 5] = flag(layer.material.0 != 0);
    }
    let t = inp.traffic;
    x[24] = t.truck_ratio;
    x[25] = t.annual_esal;
    x[26] = t.annual_aadt;
    x[27] = t.annual_aadt * t.truck_ratio;
    x[28] = math::ln_1p(t.annual_esal / 1e6);
    x[29] = t.annual_esal * inp.interval_years;
    x[30] = inp.climate.annual_precipitation;
    x[31] = inp.climate.freeze_thaw_cycles;
    x[32] = inp.climate.freeze.as_flag();
    x[33] = inp.climate.moisture.as_flag();
    x[34] = inp.initial;
    x[35] = inp.interval_years;
    if let Some(a) = inp.action.filter(|a| a.id != 0) {
        x[36] = a.kind.ordinal() as f64;
        x[37] = a.thickness_mm.unwrap_or(0.0);
        x[38] = a.material.map(|m| m.ordinal() as f64).unwrap_or(0.0);
        x[39] = inp.action_years_since_epoch;
    }
    x
}

/// One supervised example: raw (unscaled) 40-input vector and the next value
/// of the indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub segment_id: String,
    pub input: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairBuild {
    pub pairs: Vec<TrainingPair>,
    /// Segments with fewer than two observations.
    pub skipped: Vec<String>,
}

/// Pairs each observation with the next one on the same segment.
///
/// The maintenance slots describe the latest action dated in
/// `(earlier, later]`; traffic and weather are taken from the earlier row.
pub fn build_training_pairs(dataset: &Dataset, indicator: Indicator, epoch_year: i32) -> Result<PairBuild> {
    let catalog = build_action_catalog();
    let mut out = PairBuild::default();
    for seg in &dataset.segments {
        if seg.snapshots.len() < 2 {
            out.skipped.push(seg.segment_id.clone());
            continue;
        }
        for w in seg.snapshots.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let interval_years = a.date.years_between(b.date);
            if !(interval_years > 0.0) {
                return Err(Error::validation(alloc::format!(
                    "segment {}: observations are not strictly time-ordered",
                    seg.segment_id
                )));
            }
            let event = seg
                .actions
                .iter().rfind(|e| e.date > a.date && e.date <= b.date);
            let action = event.map(|e| catalog.get(e.action_id as usize)).transpose()?;
            let climate = seg.climate_at(a);
            let (initial, target) = match indicator {
                Indicator::Iri => (a.iri, b.iri),
                Indicator::Rd => (a.rd, b.rd),
            };
            let input = assemble_surrogate_input(&SurrogateInputs {
                structure: &seg.structure,
                traffic: &a.traffic,
                climate: &climate,
                initial,
                interval_years,
                action,
                action_years_since_epoch: event.map(|e| e.date.years_since(epoch_year)).unwrap_or(0.0),
            });
            out.pairs.push(TrainingPair {
                segment_id: seg.segment_id.clone(),
                input: input.to_vec(),
                target,
            });
        }
    }
    Ok(out)
}
