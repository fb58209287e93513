//! Yearly pavement transitions under a maintenance action, either from the
//! parametric deterioration model or from a trained surrogate pair, plus the
//! episode wrapper the agents train on.

mod episode;
mod sampler;
mod surrogate;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataprep::{assemble_surrogate_input, SurrogateInputs};
use crate::domain::{build_action_catalog, ActionCatalog, MaintenanceAction, SegmentState, TreatmentKind};
use crate::error::{Error, Result};
use crate::math;

pub use episode::{default_agent_ranges, EpisodeSetup, MaintenanceEnv};
pub use sampler::{reset, InitialStateSampler, RandomizedBounds};
pub use surrogate::{
    predict_next, train_surrogate, FitReport, IndicatorFit, SurrogatePair, SurrogateTrainingConfig,
};

/// Indicators are never clipped below this value.
pub const MIN_INDICATOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentMode {
    #[default]
    Parametric,
    Surrogate,
}

/// Yearly growth of one indicator:
/// `(base_rate + traffic·ln(1 + ESAL/1e6) + climate·freeze_thaw/100)·(1 + age_acceleration·age)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCoefficients {
    pub base_rate: f64,
    pub traffic_sensitivity: f64,
    pub climate_sensitivity: f64,
    pub age_acceleration: f64,
}

impl GrowthCoefficients {
    pub fn yearly_growth(&self, s: &SegmentState) -> f64 {
        let traffic = math::ln_1p(s.traffic.annual_esal / 1e6);
        let climate = s.climate.freeze_thaw_cycles / 100.0;
        (self.base_rate + self.traffic_sensitivity * traffic + self.climate_sensitivity * climate)
            * (1.0 + self.age_acceleration * s.age_years)
    }

    fn validate(&self, name: &str) -> Result<()> {
        let all = [self.base_rate, self.traffic_sensitivity, self.climate_sensitivity, self.age_acceleration];
        if all.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::config(alloc::format!("{name} growth coefficients must be finite and >= 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParametricCoefficients {
    pub iri: GrowthCoefficients,
    pub rd: GrowthCoefficients,
}

impl Default for ParametricCoefficients {
    fn default() -> Self {
        Self {
            iri: GrowthCoefficients {
                base_rate: 0.03,
                traffic_sensitivity: 0.12,
                climate_sensitivity: 0.05,
                age_acceleration: 0.08,
            },
            rd: GrowthCoefficients {
                base_rate: 0.2,
                traffic_sensitivity: 0.7,
                climate_sensitivity: 0.2,
                age_acceleration: 0.06,
            },
        }
    }
}

/// Indicator levels a reconstruction-class action brings the segment down
/// to; thicker applications go lower by `*_per_mm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetLevels {
    pub iri: f64,
    pub rd: f64,
    #[serde(default)]
    pub iri_per_mm: f64,
    #[serde(default)]
    pub rd_per_mm: f64,
}

/// What one treatment kind does at the start of the year it is applied.
///
/// Indicators are first reduced by `reduction + reduction_per_mm·thickness`
/// (capped at 1), then floored to the reset levels if present. Age is
/// multiplied by `1 - age_reduction` and that year's growth by
/// `growth_factor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreatmentEffect {
    pub iri_reduction: f64,
    pub rd_reduction: f64,
    #[serde(default)]
    pub reduction_per_mm: f64,
    #[serde(default)]
    pub reset: Option<ResetLevels>,
    #[serde(default)]
    pub age_reduction: f64,
    pub growth_factor: f64,
    /// Overlays add their thickness to the surface layer.
    #[serde(default)]
    pub adds_surface_thickness: bool,
}

impl TreatmentEffect {
    fn fraction(&self, base: f64, mm: f64) -> f64 {
        (base + self.reduction_per_mm * mm).clamp(0.0, 1.0)
    }

    /// Post-action (iri, rd) before the year's deterioration.
    pub fn apply(&self, iri: f64, rd: f64, thickness_mm: f64) -> (f64, f64) {
        let mut i = iri * (1.0 - self.fraction(self.iri_reduction, thickness_mm));
        let mut r = rd * (1.0 - self.fraction(self.rd_reduction, thickness_mm));
        if let Some(z) = self.reset {
            i = i.min((z.iri - z.iri_per_mm * thickness_mm).max(MIN_INDICATOR));
            r = r.min((z.rd - z.rd_per_mm * thickness_mm).max(0.0));
        }
        (i, r)
    }

    fn validate(&self, name: &str) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let ok = unit(self.iri_reduction)
            && unit(self.rd_reduction)
            && self.reduction_per_mm >= 0.0
            && unit(self.age_reduction)
            && unit(self.growth_factor)
            && self
                .reset
                .is_none_or(|z| z.iri > 0.0 && z.rd >= 0.0 && z.iri_per_mm >= 0.0 && z.rd_per_mm >= 0.0);
        if !ok {
            return Err(Error::config(alloc::format!(
                "effect for {name}: fractions and growth factor must lie in [0, 1], per-mm terms >= 0"
            )));
        }
        Ok(())
    }
}

/// Effect of every treatment kind; do-nothing has no entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionEffectTable {
    pub asphalt_concrete_overlay: TreatmentEffect,
    pub hot_mix_recycled_ac_overlay: TreatmentEffect,
    pub mill_off_ac_overlay_ac: TreatmentEffect,
    pub mill_existing_overlay_recycled_ac: TreatmentEffect,
    pub aggregate_seal_coat: TreatmentEffect,
    pub fog_seal_coat: TreatmentEffect,
    pub crack_sealing_patching: TreatmentEffect,
}

impl ActionEffectTable {
    pub fn get(&self, kind: TreatmentKind) -> Option<&TreatmentEffect> {
        Some(match kind {
            TreatmentKind::DoNothing => return None,
            TreatmentKind::AsphaltConcreteOverlay => &self.asphalt_concrete_overlay,
            TreatmentKind::HotMixRecycledACOverlay => &self.hot_mix_recycled_ac_overlay,
            TreatmentKind::MillOffACOverlayAC => &self.mill_off_ac_overlay_ac,
            TreatmentKind::MillExistingOverlayRecycledAC => &self.mill_existing_overlay_recycled_ac,
            TreatmentKind::AggregateSealCoat => &self.aggregate_seal_coat,
            TreatmentKind::FogSealCoat => &self.fog_seal_coat,
            TreatmentKind::CrackSealingPatching => &self.crack_sealing_patching,
        })
    }

    fn validate(&self) -> Result<()> {
        for kind in TreatmentKind::REPORT_ORDER {
            if let Some(e) = self.get(kind) {
                e.validate(kind.name())?;
            }
        }
        Ok(())
    }
}

impl Default for ActionEffectTable {
    fn default() -> Self {
        let overlay = TreatmentEffect {
            iri_reduction: 0.15,
            rd_reduction: 0.25,
            reduction_per_mm: 0.004,
            reset: None,
            age_reduction: 0.5,
            growth_factor: 1.0,
            adds_surface_thickness: true,
        };
        let mill = TreatmentEffect {
            iri_reduction: 0.0,
            rd_reduction: 0.0,
            reduction_per_mm: 0.0,
            reset: Some(ResetLevels {
                iri: 1.1,
                rd: 1.5,
                iri_per_mm: 0.002,
                rd_per_mm: 0.005,
            }),
            age_reduction: 1.0,
            growth_factor: 1.0,
            adds_surface_thickness: false,
        };
        Self {
            asphalt_concrete_overlay: overlay,
            hot_mix_recycled_ac_overlay: TreatmentEffect {
                iri_reduction: 0.12,
                rd_reduction: 0.22,
                age_reduction: 0.4,
                ..overlay
            },
            mill_off_ac_overlay_ac: mill,
            mill_existing_overlay_recycled_ac: TreatmentEffect {
                reset: Some(ResetLevels {
                    iri: 1.2,
                    rd: 1.8,
                    iri_per_mm: 0.002,
                    rd_per_mm: 0.005,
                }),
                ..mill
            },
            aggregate_seal_coat: TreatmentEffect {
                iri_reduction: 0.06,
                rd_reduction: 0.04,
                reduction_per_mm: 0.0,
                reset: None,
                age_reduction: 0.15,
                growth_factor: 0.4,
                adds_surface_thickness: false,
            },
            fog_seal_coat: TreatmentEffect {
                iri_reduction: 0.02,
                rd_reduction: 0.0,
                reduction_per_mm: 0.0,
                reset: None,
                age_reduction: 0.1,
                growth_factor: 0.6,
                adds_surface_thickness: false,
            },
            crack_sealing_patching: TreatmentEffect {
                iri_reduction: 0.04,
                rd_reduction: 0.06,
                reduction_per_mm: 0.0,
                reset: None,
                age_reduction: 0.05,
                growth_factor: 0.6,
                adds_surface_thickness: false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IndicatorCaps {
    /// m/km
    pub iri_max: f64,
    /// mm
    pub rd_max: f64,
}

impl Default for IndicatorCaps {
    fn default() -> Self {
        Self {
            iri_max: 5.0,
            rd_max: 25.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentConfig {
    pub mode: EnvironmentMode,
    pub horizon_years: u32,
    pub parametric: ParametricCoefficients,
    pub effects: ActionEffectTable,
    pub caps: IndicatorCaps,
}

impl Default for EnvironmentConfig {
    fn default() -> Self {
        Self {
            mode: EnvironmentMode::Parametric,
            horizon_years: 20,
            parametric: ParametricCoefficients::default(),
            effects: ActionEffectTable::default(),
            caps: IndicatorCaps::default(),
        }
    }
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_years < 1 {
            return Err(Error::config("horizon must be at least one year"));
        }
        self.parametric.iri.validate("iri")?;
        self.parametric.rd.validate("rd")?;
        self.effects.validate()?;
        if !(self.caps.iri_max > 0.0) || !(self.caps.rd_max > 0.0) {
            return Err(Error::config("indicator caps must be positive"));
        }
        Ok(())
    }

    pub fn clip_iri(&self, v: f64) -> f64 {
        v.clamp(MIN_INDICATOR, self.caps.iri_max)
    }

    pub fn clip_rd(&self, v: f64) -> f64 {
        v.clamp(MIN_INDICATOR, self.caps.rd_max)
    }
}

/// The transition function: configuration, catalog and (in surrogate mode)
/// the trained networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulator {
    config: EnvironmentConfig,
    catalog: ActionCatalog,
    surrogate: Option<SurrogatePair>,
}

impl Simulator {
    pub fn parametric(config: EnvironmentConfig) -> Result<Self> {
        Self::new(config, None)
    }

    pub fn new(config: EnvironmentConfig, surrogate: Option<SurrogatePair>) -> Result<Self> {
        config.validate()?;
        match (config.mode, &surrogate) {
            (EnvironmentMode::Surrogate, None) => {
                return Err(Error::config("surrogate mode needs a trained surrogate pair"))
            }
            (EnvironmentMode::Surrogate, Some(sp)) => sp.validate()?,
            (EnvironmentMode::Parametric, _) => {}
        }
        Ok(Self {
            config,
            catalog: build_action_catalog(),
            surrogate,
        })
    }

    pub fn config(&self) -> &EnvironmentConfig {
        &self.config
    }

    pub fn catalog(&self) -> &ActionCatalog {
        &self.catalog
    }

    pub fn surrogate(&self) -> Option<&SurrogatePair> {
        self.surrogate.as_ref()
    }

    /// Advances `s` by one year under `action_id`.
    pub fn step(&self, s: &SegmentState, action_id: usize) -> Result<SegmentState> {
        let action = self
            .catalog
            .get(action_id)
            .map_err(|_| Error::validation(alloc::format!("invalid action id {action_id}")))?;
        let mut next = *s;
        let mut growth = 1.0;
        let mm = action.thickness_mm.unwrap_or(0.0);
        if let Some(effect) = self.config.effects.get(action.kind) {
            let (iri, rd) = effect.apply(s.iri, s.rd, mm);
            next.iri = iri;
            next.rd = rd;
            next.age_years = s.age_years * (1.0 - effect.age_reduction);
            growth = effect.growth_factor;
            if effect.adds_surface_thickness {
                next.structure.surface.thickness_mm += mm;
            }
        }
        match self.config.mode {
            EnvironmentMode::Parametric => {
                let p = &self.config.parametric;
                next.iri += growth * p.iri.yearly_growth(&next);
                next.rd += growth * p.rd.yearly_growth(&next);
            }
            EnvironmentMode::Surrogate => {
                let sp = self.surrogate.as_ref().expect("checked at construction");
                let (iri, rd) = sp.step_indicators(s, action, &self.config)?;
                next.iri = iri;
                next.rd = rd;
            }
        }
        next.iri = self.config.clip_iri(next.iri);
        next.rd = self.config.clip_rd(next.rd);
        next.age_years += 1.0;
        next.calendar_year += 1;
        Ok(next)
    }

    /// Do-nothing trajectory of `horizon + 1` (iri, rd) points.
    pub fn baseline_trajectory(&self, s0: &SegmentState, horizon: u32) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::with_capacity(horizon as usize + 1);
        let mut s = *s0;
        out.push((s.iri, s.rd));
        for _ in 0..horizon {
            s = self.step(&s, 0)?;
            out.push((s.iri, s.rd));
        }
        Ok(out)
    }
}

/// Raw 40-input surrogate vector for a one-year step of `s` under `action`.
pub fn surrogate_input_for_step(
    s: &SegmentState,
    action: &MaintenanceAction,
    initial: f64,
    epoch_year: i32,
) -> [f64; crate::dataprep::SURROGATE_INPUTS] {
    assemble_surrogate_input(&SurrogateInputs {
        structure: &s.structure,
        traffic: &s.traffic,
        climate: &s.climate,
        initial,
        interval_years: 1.0,
        action: Some(action),
        action_years_since_epoch: (s.calendar_year - epoch_year) as f64,
    })
}
