//! Reward accounting: benefit areas against the do-nothing curve, discounted
//! economic plus carbon-priced environmental cost, cost-effectiveness and the
//! per-step reward.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataprep::FeatureRange;
use crate::domain::{build_action_catalog, TreatmentKind, ACTION_COUNT};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pollutant {
    So2,
    Co2,
    Nox,
    Pm25,
    Co,
    Ch4,
    N2o,
}

impl Pollutant {
    pub const ALL: [Pollutant; 7] = [
        Pollutant::So2,
        Pollutant::Co2,
        Pollutant::Nox,
        Pollutant::Pm25,
        Pollutant::Co,
        Pollutant::Ch4,
        Pollutant::N2o,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pollutant::So2 => "SO2",
            Pollutant::Co2 => "CO2",
            Pollutant::Nox => "NOx",
            Pollutant::Pm25 => "PM2.5",
            Pollutant::Co => "CO",
            Pollutant::Ch4 => "CH4",
            Pollutant::N2o => "N2O",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    Production,
    Transportation,
    Construction,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Production, Stage::Transportation, Stage::Construction];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Production => "production",
            Stage::Transportation => "transportation",
            Stage::Construction => "construction",
        }
    }
}

/// Pollutant masses (kg) by life-cycle stage for one application of an action
/// on one segment. Indexed `[stage][pollutant]` in the `ALL` orders.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmissionsInventory {
    pub kg: [[f64; 7]; 3],
}

impl EmissionsInventory {
    pub fn single(stage: Stage, pollutant: Pollutant, kg: f64) -> Self {
        let mut e = Self::default();
        e.kg[stage as usize][pollutant.index()] = kg;
        e
    }

    pub fn total(&self, pollutant: Pollutant) -> f64 {
        self.kg.iter().map(|s| s[pollutant.index()]).sum()
    }

    pub fn totals(&self) -> [f64; 7] {
        let mut t = [0.0; 7];
        for p in Pollutant::ALL {
            t[p.index()] = self.total(p);
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.kg.iter().flatten().all(|&x| x == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kg.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::validation("emission masses must be finite and non-negative"));
        }
        Ok(())
    }
}

impl core::ops::Add for EmissionsInventory {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.kg.iter_mut().flatten().zip(rhs.kg.iter().flatten()) {
            *a += b;
        }
        self
    }
}

/// Global-warming-potential factors (kg CO₂e per kg). `None` marks pollutants
/// without a factor; they are tracked but contribute nothing to CO₂e.
///
/// Serialized as a map from pollutant name to factor, leaving blanks out, so
/// a config can override the table with e.g. `{ CO2 = 1.0, CH4 = 25.0 }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GwpTable {
    pub factors: [Option<f64>; 7],
}

const POLLUTANT_NAMES: [&str; 7] = ["SO2", "CO2", "NOx", "PM2.5", "CO", "CH4", "N2O"];

impl Serialize for GwpTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let set: Vec<(&str, f64)> = Pollutant::ALL
            .iter()
            .filter_map(|p| self.factors[p.index()].map(|f| (p.name(), f)))
            .collect();
        let mut m = s.serialize_map(Some(set.len()))?;
        for (k, v) in set {
            m.serialize_entry(k, &v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for GwpTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        struct Factors;

        impl<'de> serde::de::Visitor<'de> for Factors {
            type Value = GwpTable;

            fn expecting(&self, f: &mut core::fmt::Formatter) -> core::fmt::Result {
                f.write_str("a map from pollutant name to GWP factor")
            }

            fn visit_map<A: serde::de::MapAccess<'de>>(self, mut map: A) -> core::result::Result<GwpTable, A::Error> {
                let mut factors = [None; 7];
                while let Some(key) = map.next_key::<alloc::string::String>()? {
                    let i = POLLUTANT_NAMES
                        .iter()
                        .position(|n| *n == key)
                        .ok_or_else(|| serde::de::Error::unknown_field(&key, &POLLUTANT_NAMES))?;
                    if factors[i].is_some() {
                        return Err(serde::de::Error::custom(alloc::format!("duplicate pollutant {key}")));
                    }
                    factors[i] = Some(map.next_value()?);
                }
                Ok(GwpTable { factors })
            }
        }

        d.deserialize_map(Factors)
    }
}

impl Default for GwpTable {
    fn default() -> Self {
        Self {
            // SO2, CO2, NOx, PM2.5, CO, CH4, N2O
            factors: [None, Some(1.0), None, None, Some(3.0), Some(21.0), Some(310.0)],
        }
    }
}

/// CO₂-equivalent of an inventory in metric tons.
pub fn gwp_co2e(e: &EmissionsInventory, gwp: &GwpTable) -> Result<f64> {
    e.validate()?;
    let kg: f64 = Pollutant::ALL
        .iter()
        .filter_map(|&p| gwp.factors[p.index()].map(|f| f * e.total(p)))
        .sum();
    Ok(kg / 1000.0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionCost {
    /// Currency units per application on one segment.
    pub economic_cost: f64,
    pub emissions: EmissionsInventory,
}

/// Economic cost and emissions for every catalog action, indexed by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostCatalog {
    pub entries: Vec<ActionCost>,
}

impl CostCatalog {
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != ACTION_COUNT {
            return Err(Error::config(alloc::format!(
                "cost catalog must list {ACTION_COUNT} actions, lists {}",
                self.entries.len()
            )));
        }
        let dn = &self.entries[0];
        if dn.economic_cost != 0.0 || !dn.emissions.is_zero() {
            return Err(Error::config("do-nothing must have zero cost and zero emissions"));
        }
        for (id, e) in self.entries.iter().enumerate() {
            if !(e.economic_cost >= 0.0) || !e.economic_cost.is_finite() {
                return Err(Error::config(alloc::format!("action {id}: cost must be non-negative")));
            }
            e.emissions
                .validate()
                .map_err(|_| Error::config(alloc::format!("action {id}: emissions must be non-negative")))?;
        }
        Ok(())
    }

    pub fn get(&self, action_id: usize) -> Result<&ActionCost> {
        self.entries
            .get(action_id)
            .ok_or_else(|| Error::config(alloc::format!("action {action_id} missing from cost catalog")))
    }

    /// Non-authoritative placeholder costs for a segment of `area_m2`.
    ///
    /// Unit prices are rough per-m² figures; emissions assume 2.4 t/m³ hot
    /// mix with per-tonne production, haul and paving factors. Replace with
    /// local data for real studies.
    pub fn placeholder(area_m2: f64) -> Self {
        const DENSITY_T_PER_M3: f64 = 2.4;
        // kg per tonne of hot mix: SO2, CO2, NOx, PM2.5, CO, CH4, N2O
        const PRODUCTION: [f64; 7] = [0.20, 40.0, 0.30, 0.02, 0.10, 0.050, 0.0010];
        const TRANSPORT: [f64; 7] = [0.01, 5.0, 0.05, 0.005, 0.02, 0.002, 0.0002];
        const PAVING: [f64; 7] = [0.01, 3.0, 0.04, 0.004, 0.015, 0.001, 0.0001];
        // kg per m² milled
        const MILLING: [f64; 7] = [0.002, 1.5, 0.02, 0.002, 0.008, 0.0005, 0.00005];

        let catalog = build_action_catalog();
        let entries = catalog
            .iter()
            .map(|a| {
                let mut cost = ActionCost::default();
                let mm = a.thickness_mm.unwrap_or(0.0);
                let premium = match a.material {
                    Some(crate::domain::TreatmentMaterial::Ac30) => 1.08,
                    _ => 1.0,
                };
                let recycled = matches!(
                    a.kind,
                    TreatmentKind::HotMixRecycledACOverlay | TreatmentKind::MillExistingOverlayRecycledAC
                );
                let milled = a.kind.is_mill_and_overlay();
                let tonnes = mm / 1000.0 * area_m2 * DENSITY_T_PER_M3;
                let (unit_price, mix_tonnes) = match a.kind {
                    TreatmentKind::DoNothing => (0.0, 0.0),
                    TreatmentKind::AggregateSealCoat => (2.0, 0.012 * area_m2),
                    TreatmentKind::FogSealCoat => (0.9, 0.001 * area_m2),
                    TreatmentKind::CrackSealingPatching => (1.3, 0.004 * area_m2),
                    _ => {
                        let mut p = 2.0 + 5.0 * mm / 25.4 * premium;
                        if recycled {
                            p *= 0.85;
                        }
                        if milled {
                            p += 3.0 + 0.02 * mm;
                        }
                        (p, tonnes)
                    }
                };
                cost.economic_cost = math::round(unit_price * area_m2);
                let production_scale = if recycled { 0.7 } else { 1.0 };
                for p in 0..7 {
                    cost.emissions.kg[0][p] = PRODUCTION[p] * mix_tonnes * production_scale;
                    cost.emissions.kg[1][p] = TRANSPORT[p] * mix_tonnes;
                    cost.emissions.kg[2][p] = PAVING[p] * mix_tonnes + if milled { MILLING[p] * area_m2 } else { 0.0 };
                }
                cost
            })
            .collect();
        Self { entries }
    }
}

/// Parameters of the reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub iri_weight: f64,
    pub rd_weight: f64,
    pub discount_base: f64,
    /// Currency per metric ton CO₂e.
    pub carbon_price: f64,
    /// Range used to normalize IRI areas (m/km).
    pub iri_range: FeatureRange,
    /// Range used to normalize RD areas (mm).
    pub rd_range: FeatureRange,
    pub gwp: GwpTable,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            iri_weight: 0.55,
            rd_weight: 0.45,
            discount_base: 1.04,
            carbon_price: 50.0,
            iri_range: FeatureRange::new(0.5, 5.0),
            rd_range: FeatureRange::new(0.0, 25.0),
            gwp: GwpTable::default(),
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if math::abs(self.iri_weight + self.rd_weight - 1.0) > 1e-12 || self.iri_weight < 0.0 || self.rd_weight < 0.0 {
            return Err(Error::config("indicator weights must be non-negative and sum to 1"));
        }
        if !(self.discount_base > 0.0) {
            return Err(Error::config("discount base must be positive"));
        }
        if !(self.carbon_price >= 0.0) {
            return Err(Error::config("carbon price must be non-negative"));
        }
        for r in [self.iri_range, self.rd_range] {
            if r.is_constant() {
                return Err(Error::config("indicator normalization range is degenerate"));
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> [f64; 2] {
        [self.iri_weight, self.rd_weight]
    }

    pub fn ranges(&self) -> [FeatureRange; 2] {
        [self.iri_range, self.rd_range]
    }
}

/// Environmental cost of one application: CO₂e tons × carbon price.
pub fn env_cost(action_id: usize, catalog: &CostCatalog, carbon_price: f64, gwp: &GwpTable) -> Result<f64> {
    let co2e = gwp_co2e(&catalog.get(action_id)?.emissions, gwp)?;
    if co2e == 0.0 {
        return Ok(0.0);
    }
    Ok(co2e * carbon_price)
}

/// Economic plus environmental cost of `action_id` discounted to year `t`.
pub fn discounted_step_cost(action_id: usize, catalog: &CostCatalog, cfg: &RewardConfig, t: u32) -> Result<f64> {
    let economic = catalog.get(action_id)?.economic_cost;
    let total = economic + env_cost(action_id, catalog, cfg.carbon_price, &cfg.gwp)?;
    Ok(total / math::powi(cfg.discount_base, t as i32))
}

/// Normalized area between the do-nothing curve and the actual curve over one
/// year (trapezoid rule). Positive when the actual curve is below baseline.
pub fn step_area(baseline: (f64, f64), actual: (f64, f64), range: FeatureRange) -> Result<f64> {
    if range.is_constant() {
        return Err(Error::config("indicator normalization range is degenerate"));
    }
    let gap0 = baseline.0 - actual.0;
    let gap1 = baseline.1 - actual.1;
    Ok((gap0 + gap1) / 2.0 / range.width())
}

/// One row of a ledger dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub step: u32,
    pub action_id: u8,
    pub areas: [f64; 2],
    pub discounted_cost: f64,
    pub effcost: f64,
    pub reward: f64,
}

/// Running totals for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardLedger {
    total_area: [f64; 2],
    total_cost: f64,
    weights: [f64; 2],
    entries: Vec<LedgerEntry>,
}

impl RewardLedger {
    pub fn new(cfg: &RewardConfig) -> Self {
        Self {
            total_area: [0.0; 2],
            total_cost: 0.0,
            weights: cfg.weights(),
            entries: Vec::new(),
        }
    }

    pub fn next_step(&self) -> u32 {
        self.entries.len() as u32
    }

    pub fn total_area(&self) -> [f64; 2] {
        self.total_area
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Area per unit of discounted cost for indicator `i` (0 = IRI, 1 = RD);
    /// zero while nothing has been spent.
    pub fn eff_cost(&self, i: usize) -> f64 {
        if self.total_cost != 0.0 {
            self.total_area[i] / self.total_cost
        } else {
            0.0
        }
    }

    pub fn final_effcost(&self) -> f64 {
        self.weights[0] * self.eff_cost(0) + self.weights[1] * self.eff_cost(1)
    }

    /// Adds step `t` and returns its reward.
    pub fn update(
        &mut self,
        areas: [f64; 2],
        action_id: usize,
        t: u32,
        catalog: &CostCatalog,
        cfg: &RewardConfig,
    ) -> Result<f64> {
        if t != self.next_step() {
            return Err(Error::Sequence {
                expected: self.next_step() as usize,
                actual: t as usize,
            });
        }
        let cost = discounted_step_cost(action_id, catalog, cfg, t)?;
        let before = self.final_effcost();
        self.total_area[0] += areas[0];
        self.total_area[1] += areas[1];
        self.total_cost += cost;
        let effcost = self.final_effcost();
        let reward = effcost - before;
        self.entries.push(LedgerEntry {
            step: t,
            action_id: action_id as u8,
            areas,
            discounted_cost: cost,
            effcost,
            reward,
        });
        Ok(reward)
    }
}

/// Reward between two consecutive ledger states.
pub fn reward(prev: &RewardLedger, next: &RewardLedger) -> f64 {
    next.final_effcost() - prev.final_effcost()
}
