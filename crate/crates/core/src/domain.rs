//! Segment state, the maintenance action catalog, agent feature encoding and
//! condition classification.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::dataprep::{minmax_apply, minmax_invert, FeatureRange, NormalizationParams};
use crate::error::{Error, Result};

/// Index into one of the [`Vocabulary`] code lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CategoryCode(pub u16);

/// Closed lists of categorical codes accepted in structure fields.
///
/// Index 0 of each list is `NONE` (layer absent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub layer_types: Vec<String>,
    pub materials: Vec<String>,
}

pub const STANDARD_LAYER_TYPES: &[&str] = &["NONE", "AC", "PCC", "GB", "TB", "GS", "SS"];

pub const STANDARD_MATERIALS: &[&str] = &[
    "NONE",
    "AC-10",
    "AC-20",
    "AC-30",
    "HFRS-2P",
    "PG-64-22",
    "PG-70-22",
    "CRUSHED-STONE",
    "GRAVEL",
    "SAND",
    "CEMENT-TREATED",
    "LIME-TREATED",
    "SOIL",
];

impl Default for Vocabulary {
    fn default() -> Self {
        Self::standard()
    }
}

impl Vocabulary {
    /// The code lists shipped with the crate.
    pub fn standard() -> Self {
        Self {
            layer_types: STANDARD_LAYER_TYPES.iter().map(|s| s.to_string()).collect(),
            materials: STANDARD_MATERIALS.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn lookup(list: &[String], field: &str, code: &str) -> Result<CategoryCode> {
        list.iter()
            .position(|c| c == code)
            .map(|i| CategoryCode(i as u16))
            .ok_or_else(|| Error::UnknownCode {
                field: field.to_string(),
                code: code.to_string(),
            })
    }

    pub fn layer_type(&self, code: &str) -> Result<CategoryCode> {
        Self::lookup(&self.layer_types, "layer_type", code)
    }

    pub fn material(&self, code: &str) -> Result<CategoryCode> {
        Self::lookup(&self.materials, "material", code)
    }

    pub fn layer_type_name(&self, code: CategoryCode) -> Option<&str> {
        self.layer_types.get(code.0 as usize).map(String::as_str)
    }

    pub fn material_name(&self, code: CategoryCode) -> Option<&str> {
        self.materials.get(code.0 as usize).map(String::as_str)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("layer_type", &self.layer_types), ("material", &self.materials)] {
            if list.is_empty() {
                return Err(Error::config(alloc::format!("empty {name} vocabulary")));
            }
            for (i, c) in list.iter().enumerate() {
                if list[..i].contains(c) {
                    return Err(Error::config(alloc::format!("duplicate {name} code `{c}`")));
                }
            }
        }
        Ok(())
    }
}

/// One pavement layer: type code, thickness (mm) and material code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: CategoryCode,
    pub thickness_mm: f64,
    pub material: CategoryCode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureProfile {
    pub surface: Layer,
    pub binder: Layer,
    pub base: Layer,
    pub subbase: Layer,
}

impl StructureProfile {
    pub fn layers(&self) -> [&Layer; 4] {
        [&self.surface, &self.binder, &self.base, &self.subbase]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficProfile {
    /// Fraction of trucks in the traffic stream, 0..=1.
    pub truck_ratio: f64,
    /// Equivalent single-axle loads per year.
    pub annual_esal: f64,
    /// Annual average daily traffic, vehicles/day.
    pub annual_aadt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreezeZone {
    Freeze,
    NonFreeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoistureZone {
    Wet,
    Dry,
}

impl FreezeZone {
    pub fn as_flag(self) -> f64 {
        match self {
            FreezeZone::Freeze => 1.0,
            FreezeZone::NonFreeze => 0.0,
        }
    }

    pub fn from_flag(x: f64) -> Self {
        if x >= 0.5 {
            FreezeZone::Freeze
        } else {
            FreezeZone::NonFreeze
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "freeze" => Ok(FreezeZone::Freeze),
            "non-freeze" | "nonfreeze" | "non_freeze" => Ok(FreezeZone::NonFreeze),
            other => Err(Error::UnknownCode {
                field: "freeze_flag".to_string(),
                code: other.to_string(),
            }),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FreezeZone::Freeze => "freeze",
            FreezeZone::NonFreeze => "non-freeze",
        }
    }
}

impl MoistureZone {
    pub fn as_flag(self) -> f64 {
        match self {
            MoistureZone::Wet => 1.0,
            MoistureZone::Dry => 0.0,
        }
    }

    pub fn from_flag(x: f64) -> Self {
        if x >= 0.5 {
            MoistureZone::Wet
        } else {
            MoistureZone::Dry
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wet" => Ok(MoistureZone::Wet),
            "dry" => Ok(MoistureZone::Dry),
            other => Err(Error::UnknownCode {
                field: "moisture_flag".to_string(),
                code: other.to_string(),
            }),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MoistureZone::Wet => "wet",
            MoistureZone::Dry => "dry",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClimateProfile {
    /// mm/yr
    pub annual_precipitation: f64,
    /// cycles/yr
    pub freeze_thaw_cycles: f64,
    pub freeze: FreezeZone,
    pub moisture: MoistureZone,
}

/// The RL state of one road segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentState {
    pub structure: StructureProfile,
    pub traffic: TrafficProfile,
    pub climate: ClimateProfile,
    /// International Roughness Index, m/km.
    pub iri: f64,
    /// Rutting depth, mm.
    pub rd: f64,
    pub age_years: f64,
    /// Calendar year the state describes. Not part of the agent features; the
    /// surrogate environment uses it for the maintenance-date input.
    pub calendar_year: i32,
}

impl SegmentState {
    pub fn validate(&self) -> Result<()> {
        let t = &self.traffic;
        let c = &self.climate;
        let checks: [(bool, &str); 8] = [
            (self.iri > 0.0 && self.iri.is_finite(), "iri must be > 0"),
            (self.rd >= 0.0 && self.rd.is_finite(), "rd must be >= 0"),
            ((0.0..=1.0).contains(&t.truck_ratio), "truck_ratio must be in [0, 1]"),
            (t.annual_aadt >= 0.0 && t.annual_aadt.is_finite(), "annual_aadt must be >= 0"),
            (t.annual_esal >= 0.0 && t.annual_esal.is_finite(), "annual_esal must be >= 0"),
            (
                self.structure.layers().iter().all(|l| l.thickness_mm >= 0.0 && l.thickness_mm.is_finite()),
                "layer thicknesses must be >= 0",
            ),
            (
                c.annual_precipitation >= 0.0 && c.freeze_thaw_cycles >= 0.0,
                "climate quantities must be >= 0",
            ),
            (self.age_years >= 0.0, "age must be >= 0"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::validation(msg));
            }
        }
        Ok(())
    }

    pub fn indicator(&self, which: crate::dataprep::Indicator) -> f64 {
        match which {
            crate::dataprep::Indicator::Iri => self.iri,
            crate::dataprep::Indicator::Rd => self.rd,
        }
    }
}

// ---------------------------------------------------------------------------
// Action catalog

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TreatmentKind {
    DoNothing,
    AsphaltConcreteOverlay,
    HotMixRecycledACOverlay,
    MillOffACOverlayAC,
    MillExistingOverlayRecycledAC,
    AggregateSealCoat,
    FogSealCoat,
    CrackSealingPatching,
}

impl TreatmentKind {
    /// Order used by reports: the seven treatments, then do-nothing.
    pub const REPORT_ORDER: [TreatmentKind; 8] = [
        TreatmentKind::AsphaltConcreteOverlay,
        TreatmentKind::HotMixRecycledACOverlay,
        TreatmentKind::MillOffACOverlayAC,
        TreatmentKind::MillExistingOverlayRecycledAC,
        TreatmentKind::AggregateSealCoat,
        TreatmentKind::FogSealCoat,
        TreatmentKind::CrackSealingPatching,
        TreatmentKind::DoNothing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TreatmentKind::DoNothing => "DoNothing",
            TreatmentKind::AsphaltConcreteOverlay => "AsphaltConcreteOverlay",
            TreatmentKind::HotMixRecycledACOverlay => "HotMixRecycledACOverlay",
            TreatmentKind::MillOffACOverlayAC => "MillOffACOverlayAC",
            TreatmentKind::MillExistingOverlayRecycledAC => "MillExistingOverlayRecycledAC",
            TreatmentKind::AggregateSealCoat => "AggregateSealCoat",
            TreatmentKind::FogSealCoat => "FogSealCoat",
            TreatmentKind::CrackSealingPatching => "CrackSealingPatching",
        }
    }

    /// 1-based ordinal used by the surrogate's maintenance-type input; 0 is
    /// reserved for "no action".
    pub fn ordinal(self) -> u8 {
        match self {
            TreatmentKind::DoNothing => 0,
            TreatmentKind::AsphaltConcreteOverlay => 1,
            TreatmentKind::HotMixRecycledACOverlay => 2,
            TreatmentKind::MillOffACOverlayAC => 3,
            TreatmentKind::MillExistingOverlayRecycledAC => 4,
            TreatmentKind::AggregateSealCoat => 5,
            TreatmentKind::FogSealCoat => 6,
            TreatmentKind::CrackSealingPatching => 7,
        }
    }

    pub fn is_seal_coat(self) -> bool {
        matches!(self, TreatmentKind::AggregateSealCoat | TreatmentKind::FogSealCoat)
    }

    pub fn is_mill_and_overlay(self) -> bool {
        matches!(
            self,
            TreatmentKind::MillOffACOverlayAC | TreatmentKind::MillExistingOverlayRecycledAC
        )
    }

    /// Thickness options in mm; empty when the treatment has no thickness.
    pub fn thicknesses(self) -> &'static [f64] {
        match self {
            TreatmentKind::AsphaltConcreteOverlay | TreatmentKind::MillOffACOverlayAC => {
                &[25.4, 50.8, 76.2, 101.6]
            }
            TreatmentKind::HotMixRecycledACOverlay => &[38.1, 50.8, 76.2],
            TreatmentKind::MillExistingOverlayRecycledAC => &[50.8, 76.2, 101.6],
            _ => &[],
        }
    }

    pub fn materials(self) -> &'static [TreatmentMaterial] {
        match self {
            TreatmentKind::DoNothing => &[],
            TreatmentKind::AggregateSealCoat | TreatmentKind::CrackSealingPatching => {
                &[TreatmentMaterial::Ac20]
            }
            TreatmentKind::FogSealCoat => &[TreatmentMaterial::Hfrs2p],
            _ => &[TreatmentMaterial::Ac20, TreatmentMaterial::Ac30],
        }
    }
}

impl fmt::Display for TreatmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TreatmentMaterial {
    Ac20,
    Ac30,
    Hfrs2p,
}

impl TreatmentMaterial {
    pub fn code(self) -> &'static str {
        match self {
            TreatmentMaterial::Ac20 => "AC-20",
            TreatmentMaterial::Ac30 => "AC-30",
            TreatmentMaterial::Hfrs2p => "HFRS-2P",
        }
    }

    /// 1-based ordinal for the surrogate input.
    pub fn ordinal(self) -> u8 {
        match self {
            TreatmentMaterial::Ac20 => 1,
            TreatmentMaterial::Ac30 => 2,
            TreatmentMaterial::Hfrs2p => 3,
        }
    }
}

pub const ACTION_COUNT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaintenanceAction {
    pub id: u8,
    pub kind: TreatmentKind,
    pub thickness_mm: Option<f64>,
    pub material: Option<TreatmentMaterial>,
}

/// The 32 maintenance actions, indexed by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCatalog {
    actions: Vec<MaintenanceAction>,
}

/// Builds the catalog: do-nothing is id 0, then each treatment's
/// thickness × material combinations (thickness-major).
pub fn build_action_catalog() -> ActionCatalog {
    const KINDS: [TreatmentKind; 7] = [
        TreatmentKind::AsphaltConcreteOverlay,
        TreatmentKind::HotMixRecycledACOverlay,
        TreatmentKind::MillOffACOverlayAC,
        TreatmentKind::MillExistingOverlayRecycledAC,
        TreatmentKind::AggregateSealCoat,
        TreatmentKind::FogSealCoat,
        TreatmentKind::CrackSealingPatching,
    ];
    let mut actions = Vec::with_capacity(ACTION_COUNT);
    actions.push(MaintenanceAction {
        id: 0,
        kind: TreatmentKind::DoNothing,
        thickness_mm: None,
        material: None,
    });
    for kind in KINDS {
        let thicknesses: Vec<Option<f64>> = if kind.thicknesses().is_empty() {
            alloc::vec![None]
        } else {
            kind.thicknesses().iter().map(|&t| Some(t)).collect()
        };
        for thickness_mm in thicknesses {
            for &material in kind.materials() {
                actions.push(MaintenanceAction {
                    id: actions.len() as u8,
                    kind,
                    thickness_mm,
                    material: Some(material),
                });
            }
        }
    }
    debug_assert_eq!(actions.len(), ACTION_COUNT);
    ActionCatalog { actions }
}

impl ActionCatalog {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, id: usize) -> Result<&MaintenanceAction> {
        self.actions
            .get(id)
            .ok_or_else(|| Error::validation(alloc::format!("action id {id} is not in the catalog")))
    }

    pub fn iter(&self) -> core::slice::Iter<'_, MaintenanceAction> {
        self.actions.iter()
    }

    pub fn as_slice(&self) -> &[MaintenanceAction] {
        &self.actions
    }
}

impl Default for ActionCatalog {
    fn default() -> Self {
        build_action_catalog()
    }
}

// ---------------------------------------------------------------------------
// Condition bands

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionLabel {
    Excellent,
    Good,
    Fair,
    Poor,
}

impl ConditionLabel {
    pub fn name(self) -> &'static str {
        match self {
            ConditionLabel::Excellent => "excellent",
            ConditionLabel::Good => "good",
            ConditionLabel::Fair => "fair",
            ConditionLabel::Poor => "poor",
        }
    }
}

/// Upper bounds (exclusive) of one band. The last band uses `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionBand {
    pub label: ConditionLabel,
    pub iri_upper: f64,
    pub rd_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionBands {
    bands: Vec<ConditionBand>,
}

impl Default for ConditionBands {
    fn default() -> Self {
        Self::new(alloc::vec![
            ConditionBand { label: ConditionLabel::Excellent, iri_upper: 1.5, rd_upper: 6.0 },
            ConditionBand { label: ConditionLabel::Good, iri_upper: 2.7, rd_upper: 12.0 },
            ConditionBand { label: ConditionLabel::Fair, iri_upper: 3.5, rd_upper: 20.0 },
            ConditionBand {
                label: ConditionLabel::Poor,
                iri_upper: f64::INFINITY,
                rd_upper: f64::INFINITY,
            },
        ])
        .expect("default bands are valid")
    }
}

impl ConditionBands {
    pub fn new(bands: Vec<ConditionBand>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::config("at least one condition band is required"));
        }
        for w in bands.windows(2) {
            if !(w[1].iri_upper > w[0].iri_upper && w[1].rd_upper > w[0].rd_upper) {
                return Err(Error::config("condition band thresholds must be strictly increasing"));
            }
            if w[1].label <= w[0].label {
                return Err(Error::config("condition band labels must be ordered best to worst"));
            }
        }
        let last = bands.last().expect("non-empty");
        if last.iri_upper != f64::INFINITY || last.rd_upper != f64::INFINITY {
            return Err(Error::config("the last condition band must be unbounded"));
        }
        if bands[0].iri_upper <= 0.0 || bands[0].rd_upper <= 0.0 {
            return Err(Error::config("condition band thresholds must be positive"));
        }
        Ok(Self { bands })
    }

    pub fn bands(&self) -> &[ConditionBand] {
        &self.bands
    }
}

/// Worst band triggered by either indicator; upper bounds are exclusive.
pub fn classify_condition(s: &SegmentState, bands: &ConditionBands) -> ConditionLabel {
    let band_of = |v: f64, upper: fn(&ConditionBand) -> f64| {
        bands
            .bands
            .iter()
            .position(|b| v < upper(b))
            .unwrap_or(bands.bands.len() - 1)
    };
    let i = band_of(s.iri, |b| b.iri_upper);
    let r = band_of(s.rd, |b| b.rd_upper);
    bands.bands[i.max(r)].label
}

// ---------------------------------------------------------------------------
// Agent feature encoding

/// Number of features the agent observes.
pub const AGENT_FEATURES: usize = 21;

/// Feature order produced by [`encode_agent_state`].
pub const AGENT_FEATURE_NAMES: [&str; AGENT_FEATURES] = [
    "surface_type",
    "surface_thickness_mm",
    "surface_material",
    "binder_type",
    "binder_thickness_mm",
    "binder_material",
    "base_type",
    "base_thickness_mm",
    "base_material",
    "subbase_type",
    "subbase_thickness_mm",
    "subbase_material",
    "truck_ratio",
    "annual_esal",
    "annual_aadt",
    "annual_precipitation_mm",
    "freeze_thaw_cycles",
    "freeze_flag",
    "moisture_flag",
    "iri",
    "rd",
];

const CATEGORICAL_TYPE_SLOTS: [usize; 4] = [0, 3, 6, 9];
const CATEGORICAL_MATERIAL_SLOTS: [usize; 4] = [2, 5, 8, 11];

/// Raw (unscaled) agent features; categorical fields become their code index.
pub fn raw_agent_features(s: &SegmentState) -> [f64; AGENT_FEATURES] {
    let mut out = [0.0; AGENT_FEATURES];
    for (i, layer) in s.structure.layers().iter().enumerate() {
        out[3 * i] = layer.kind.0 as f64;
        out[3 * i + 1] = layer.thickness_mm;
        out[3 * i + 2] = layer.material.0 as f64;
    }
    out[12] = s.traffic.truck_ratio;
    out[13] = s.traffic.annual_esal;
    out[14] = s.traffic.annual_aadt;
    out[15] = s.climate.annual_precipitation;
    out[16] = s.climate.freeze_thaw_cycles;
    out[17] = s.climate.freeze.as_flag();
    out[18] = s.climate.moisture.as_flag();
    out[19] = s.iri;
    out[20] = s.rd;
    out
}

/// Min-max encoder for the agent's 21-feature observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEncoder {
    pub norm: NormalizationParams,
    pub layer_type_count: usize,
    pub material_count: usize,
}

impl StateEncoder {
    /// Builds an encoder whose categorical slots span the full vocabulary and
    /// whose numeric slots use the given ranges (in [`AGENT_FEATURE_NAMES`]
    /// order, categorical slots ignored).
    pub fn from_ranges(vocab: &Vocabulary, numeric: &[FeatureRange; AGENT_FEATURES]) -> Self {
        let mut ranges = numeric.to_vec();
        let lt = vocab.layer_types.len().saturating_sub(1) as f64;
        let mt = vocab.materials.len().saturating_sub(1) as f64;
        for &i in &CATEGORICAL_TYPE_SLOTS {
            ranges[i] = FeatureRange::new(0.0, lt);
        }
        for &i in &CATEGORICAL_MATERIAL_SLOTS {
            ranges[i] = FeatureRange::new(0.0, mt);
        }
        ranges[17] = FeatureRange::new(0.0, 1.0);
        ranges[18] = FeatureRange::new(0.0, 1.0);
        Self {
            norm: NormalizationParams::from_ranges(ranges),
            layer_type_count: vocab.layer_types.len(),
            material_count: vocab.materials.len(),
        }
    }

    /// Fits the encoder on a set of states.
    pub fn fit(states: &[SegmentState], vocab: &Vocabulary) -> Result<Self> {
        let rows: Vec<[f64; AGENT_FEATURES]> = states.iter().map(raw_agent_features).collect();
        let norm = NormalizationParams::fit(&rows)?;
        Ok(Self {
            norm,
            layer_type_count: vocab.layer_types.len(),
            material_count: vocab.materials.len(),
        })
    }
}

/// Encodes a state into the agent's 21 features, scaled with `enc.norm`.
pub fn encode_agent_state(s: &SegmentState, enc: &StateEncoder) -> Result<[f64; AGENT_FEATURES]> {
    if enc.norm.len() != AGENT_FEATURES {
        return Err(Error::config(alloc::format!(
            "agent normalization must cover {AGENT_FEATURES} features, has {}",
            enc.norm.len()
        )));
    }
    s.validate()?;
    for layer in s.structure.layers() {
        if layer.kind.0 as usize >= enc.layer_type_count {
            return Err(Error::UnknownCode {
                field: "layer_type".to_string(),
                code: alloc::format!("#{}", layer.kind.0),
            });
        }
        if layer.material.0 as usize >= enc.material_count {
            return Err(Error::UnknownCode {
                field: "material".to_string(),
                code: alloc::format!("#{}", layer.material.0),
            });
        }
    }
    let mut out = raw_agent_features(s);
    for (v, &r) in out.iter_mut().zip(&enc.norm.ranges) {
        *v = minmax_apply(*v, r);
    }
    Ok(out)
}

/// Inverse of [`encode_agent_state`]. Fields that are not encoded (age,
/// calendar year) come back as zero.
pub fn decode_agent_state(features: &[f64], enc: &StateEncoder) -> Result<SegmentState> {
    if features.len() != AGENT_FEATURES {
        return Err(Error::Dimension {
            expected: AGENT_FEATURES,
            actual: features.len(),
        });
    }
    let raw = enc.norm.invert(features)?;
    let code = |x: f64| CategoryCode(crate::math::round(x).max(0.0) as u16);
    let layer = |i: usize| Layer {
        kind: code(raw[3 * i]),
        thickness_mm: raw[3 * i + 1],
        material: code(raw[3 * i + 2]),
    };
    Ok(SegmentState {
        structure: StructureProfile {
            surface: layer(0),
            binder: layer(1),
            base: layer(2),
            subbase: layer(3),
        },
        traffic: TrafficProfile {
            truck_ratio: raw[12],
            annual_esal: raw[13],
            annual_aadt: raw[14],
        },
        climate: ClimateProfile {
            annual_precipitation: raw[15],
            freeze_thaw_cycles: raw[16],
            freeze: FreezeZone::from_flag(raw[17]),
            moisture: MoistureZone::from_flag(raw[18]),
        },
        iri: raw[19],
        rd: raw[20],
        age_years: 0.0,
        calendar_year: 0,
    })
}

/// Applies `minmax_invert` on a single agent slot; handy for reports.
pub fn decode_agent_slot(value: f64, slot: usize, enc: &StateEncoder) -> f64 {
    minmax_invert(value, enc.norm.ranges[slot])
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use alloc::vec;

    #[test]
    fn catalog_has_32_entries_with_do_nothing_first() {
        let cat = build_action_catalog();
        assert_eq!(cat.len(), 32);
        assert_eq!(cat.get(0).unwrap().kind, TreatmentKind::DoNothing);
        for (i, a) in cat.iter().enumerate() {
            assert_eq!(a.id as usize, i);
        }
    }

    #[test]
    fn catalog_kind_counts_match_table() {
        let cat = build_action_catalog();
        let count = |k| cat.iter().filter(|a| a.kind == k).count();
        assert_eq!(count(TreatmentKind::AsphaltConcreteOverlay), 8);
        assert_eq!(count(TreatmentKind::HotMixRecycledACOverlay), 6);
        assert_eq!(count(TreatmentKind::MillOffACOverlayAC), 8);
        assert_eq!(count(TreatmentKind::MillExistingOverlayRecycledAC), 6);
        assert_eq!(count(TreatmentKind::AggregateSealCoat), 1);
        assert_eq!(count(TreatmentKind::FogSealCoat), 1);
        assert_eq!(count(TreatmentKind::CrackSealingPatching), 1);
        assert_eq!(count(TreatmentKind::DoNothing), 1);
    }

    #[test]
    fn catalog_is_a_bijection_and_stable() {
        let a = build_action_catalog();
        let b = build_action_catalog();
        assert_eq!(a, b);
        for (i, x) in a.iter().enumerate() {
            for y in a.iter().skip(i + 1) {
                assert!(
                    (x.kind, x.thickness_mm.map(f64::to_bits), x.material)
                        != (y.kind, y.thickness_mm.map(f64::to_bits), y.material)
                );
            }
        }
    }

    #[test]
    fn thickness_present_iff_kind_admits_it() {
        for a in build_action_catalog().iter() {
            assert_eq!(a.thickness_mm.is_some(), !a.kind.thicknesses().is_empty());
            assert_eq!(a.material.is_some(), a.kind != TreatmentKind::DoNothing);
        }
    }

    #[test]
    fn unknown_action_id_is_rejected() {
        assert!(build_action_catalog().get(32).is_err());
    }

    #[test]
    fn vocabulary_rejects_unknown_codes() {
        let v = Vocabulary::standard();
        assert_eq!(v.material("AC-20").unwrap(), CategoryCode(2));
        assert!(matches!(v.material("XYZ"), Err(Error::UnknownCode { .. })));
        v.validate().unwrap();
    }

    #[test]
    fn classify_worst_of_both_indicators() {
        let bands = ConditionBands::default();
        assert_eq!(classify_condition(&segment(1.0, 3.0), &bands), ConditionLabel::Excellent);
        assert_eq!(classify_condition(&segment(1.0, 25.0), &bands), ConditionLabel::Poor);
        assert_eq!(classify_condition(&segment(3.0, 3.0), &bands), ConditionLabel::Fair);
        // upper bounds exclusive
        assert_eq!(classify_condition(&segment(1.5, 3.0), &bands), ConditionLabel::Good);
        assert_eq!(classify_condition(&segment(1.4999, 3.0), &bands), ConditionLabel::Excellent);
    }

    #[test]
    fn bands_must_increase() {
        let bad = vec![
            ConditionBand { label: ConditionLabel::Excellent, iri_upper: 2.0, rd_upper: 6.0 },
            ConditionBand { label: ConditionLabel::Good, iri_upper: 1.0, rd_upper: 12.0 },
            ConditionBand { label: ConditionLabel::Poor, iri_upper: f64::INFINITY, rd_upper: f64::INFINITY },
        ];
        assert!(ConditionBands::new(bad).is_err());
    }

    fn encoder_for(states: &[SegmentState]) -> StateEncoder {
        StateEncoder::fit(states, &Vocabulary::standard()).unwrap()
    }

    #[test]
    fn encoding_at_minima_is_zero_and_at_max_iri_is_one() {
        let lo = segment(1.0, 2.0);
        let mut hi = segment(3.0, 9.0);
        hi.structure.surface = layer(2, 80.0, 3);
        hi.structure.binder = layer(2, 90.0, 4);
        hi.structure.base = layer(4, 300.0, 8);
        hi.structure.subbase = layer(6, 250.0, 9);
        hi.traffic = TrafficProfile { truck_ratio: 0.4, annual_esal: 3e6, annual_aadt: 60_000.0 };
        hi.climate = ClimateProfile {
            annual_precipitation: 1200.0,
            freeze_thaw_cycles: 80.0,
            freeze: FreezeZone::Freeze,
            moisture: MoistureZone::Wet,
        };
        let mut lo = lo;
        lo.climate.freeze = FreezeZone::NonFreeze;
        lo.climate.moisture = MoistureZone::Dry;
        let enc = encoder_for(&[lo, hi]);
        assert_eq!(encode_agent_state(&lo, &enc).unwrap(), [0.0; AGENT_FEATURES]);
        let e = encode_agent_state(&hi, &enc).unwrap();
        assert_eq!(e[19], 1.0);
        assert!(e.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn decode_inverts_encode() {
        let a = segment(1.1, 2.5);
        let mut b = segment(2.9, 7.5);
        b.traffic.annual_esal = 2.7e6;
        b.structure.surface.thickness_mm = 90.0;
        let enc = encoder_for(&[a, b]);
        let mid = SegmentState { iri: 2.345, rd: 4.2, ..b };
        let back = decode_agent_state(&encode_agent_state(&mid, &enc).unwrap(), &enc).unwrap();
        assert!((back.iri - mid.iri).abs() < 1e-9);
        assert!((back.rd - mid.rd).abs() < 1e-9);
        assert!((back.traffic.annual_esal - mid.traffic.annual_esal).abs() < 1e-9);
        assert!((back.structure.surface.thickness_mm - 90.0).abs() < 1e-9);
        assert_eq!(back.structure.base.kind, mid.structure.base.kind);
        assert_eq!(back.climate, mid.climate);
    }

    #[test]
    fn encode_rejects_unfitted_and_unknown_codes() {
        let s = segment(1.0, 2.0);
        let empty = StateEncoder {
            norm: NormalizationParams::default(),
            layer_type_count: 7,
            material_count: 13,
        };
        assert!(matches!(encode_agent_state(&s, &empty), Err(Error::Config(_))));
        let enc = encoder_for(&[s, segment(2.0, 4.0)]);
        let mut bad = s;
        bad.structure.base.material = CategoryCode(99);
        assert!(matches!(encode_agent_state(&bad, &enc), Err(Error::UnknownCode { .. })));
    }

    #[test]
    fn invalid_state_is_rejected() {
        let enc = encoder_for(&[segment(1.0, 2.0), segment(2.0, 4.0)]);
        let mut s = segment(1.0, 2.0);
        s.traffic.truck_ratio = 1.5;
        assert!(matches!(encode_agent_state(&s, &enc), Err(Error::Validation(_))));
        s.traffic.truck_ratio = 0.2;
        s.iri = 0.0;
        assert!(encode_agent_state(&s, &enc).is_err());
    }
}
