use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{surrogate_input_for_step, EnvironmentConfig, MIN_INDICATOR};
use crate::dataprep::{minmax_apply, minmax_invert, FeatureRange, Indicator, NormalizationParams, TrainingPair, SURROGATE_INPUTS};
use crate::domain::{MaintenanceAction, SegmentState};
use crate::error::{Error, Result};
use crate::math;
use crate::neural::{Head, Mlp, Optimizer};

/// Two regression networks, one per indicator, with the input and target
/// scaling they were trained under.
///
/// Each indicator keeps its own input scaling because the "initial
/// indicator" slot is in that indicator's units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogatePair {
    pub iri_model: Mlp,
    pub rd_model: Mlp,
    pub iri_norm: NormalizationParams,
    pub rd_norm: NormalizationParams,
    pub iri_target: FeatureRange,
    pub rd_target: FeatureRange,
    /// Year zero of the maintenance-date input.
    pub epoch_year: i32,
}

impl SurrogatePair {
    pub fn model(&self, indicator: Indicator) -> &Mlp {
        match indicator {
            Indicator::Iri => &self.iri_model,
            Indicator::Rd => &self.rd_model,
        }
    }

    pub fn norm(&self, indicator: Indicator) -> &NormalizationParams {
        match indicator {
            Indicator::Iri => &self.iri_norm,
            Indicator::Rd => &self.rd_norm,
        }
    }

    pub fn target_range(&self, indicator: Indicator) -> FeatureRange {
        match indicator {
            Indicator::Iri => self.iri_target,
            Indicator::Rd => self.rd_target,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for ind in Indicator::ALL {
            let m = self.model(ind);
            if m.input_len() != SURROGATE_INPUTS || m.output_len() != 1 || m.head() != Head::Linear {
                return Err(Error::config(alloc::format!(
                    "{} surrogate must map {SURROGATE_INPUTS} inputs to one linear output",
                    ind.name()
                )));
            }
            if self.norm(ind).len() != SURROGATE_INPUTS {
                return Err(Error::Dimension {
                    expected: SURROGATE_INPUTS,
                    actual: self.norm(ind).len(),
                });
            }
        }
        Ok(())
    }

    /// Normalized input for one indicator's one-year step.
    pub fn normalized_step_input(
        &self,
        indicator: Indicator,
        s: &SegmentState,
        action: &MaintenanceAction,
    ) -> Result<Vec<f64>> {
        let raw = surrogate_input_for_step(s, action, s.indicator(indicator), self.epoch_year);
        self.norm(indicator).apply(&raw)
    }

    pub(super) fn step_indicators(
        &self,
        s: &SegmentState,
        action: &MaintenanceAction,
        cfg: &EnvironmentConfig,
    ) -> Result<(f64, f64)> {
        let iri = predict_next(self, Indicator::Iri, &self.normalized_step_input(Indicator::Iri, s, action)?, cfg.caps.iri_max)?;
        let rd = predict_next(self, Indicator::Rd, &self.normalized_step_input(Indicator::Rd, s, action)?, cfg.caps.rd_max)?;
        Ok((iri, rd))
    }
}

/// Next value of `indicator` in raw units from an already-normalized input,
/// clipped to `(0, cap]`.
pub fn predict_next(sp: &SurrogatePair, indicator: Indicator, input: &[f64], cap: f64) -> Result<f64> {
    if input.len() != SURROGATE_INPUTS {
        return Err(Error::Dimension {
            expected: SURROGATE_INPUTS,
            actual: input.len(),
        });
    }
    let y = sp.model(indicator).predict(input)?[0];
    Ok(minmax_invert(y, sp.target_range(indicator)).clamp(MIN_INDICATOR, cap))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateTrainingConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub holdout_fraction: f64,
    pub min_samples: usize,
    pub seed: u64,
    pub epoch_year: i32,
}

impl Default for SurrogateTrainingConfig {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![64, 64],
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            holdout_fraction: 0.2,
            min_samples: 20,
            seed: 0,
            epoch_year: 1990,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorFit {
    pub train_count: usize,
    pub holdout_count: usize,
    pub train_rmse: f64,
    pub holdout_rmse: f64,
    pub train_r2: f64,
    pub holdout_r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iri: IndicatorFit,
    pub rd: IndicatorFit,
}

/// Fits one network per indicator on its pairs with a seeded train/holdout
/// split.
pub fn train_surrogate(
    iri_pairs: &[TrainingPair],
    rd_pairs: &[TrainingPair],
    cfg: &SurrogateTrainingConfig,
) -> Result<(SurrogatePair, FitReport)> {
    if cfg.batch_size == 0 || cfg.epochs == 0 || !(0.0..1.0).contains(&cfg.holdout_fraction) {
        return Err(Error::config("surrogate training needs epochs, batch size > 0 and holdout fraction in [0, 1)"));
    }
    let (iri_model, iri_norm, iri_target, iri) = fit_indicator(Indicator::Iri, iri_pairs, cfg)?;
    let (rd_model, rd_norm, rd_target, rd) = fit_indicator(Indicator::Rd, rd_pairs, cfg)?;
    let pair = SurrogatePair {
        iri_model,
        rd_model,
        iri_norm,
        rd_norm,
        iri_target,
        rd_target,
        epoch_year: cfg.epoch_year,
    };
    Ok((pair, FitReport { iri, rd }))
}

fn fit_indicator(
    indicator: Indicator,
    pairs: &[TrainingPair],
    cfg: &SurrogateTrainingConfig,
) -> Result<(Mlp, NormalizationParams, FeatureRange, IndicatorFit)> {
    let name = indicator.name();
    if pairs.len() < cfg.min_samples.max(2) {
        return Err(Error::validation(alloc::format!(
            "too few {name} training pairs: {} (need {})",
            pairs.len(),
            cfg.min_samples.max(2)
        )));
    }
    if let Some(p) = pairs.iter().find(|p| p.input.len() != SURROGATE_INPUTS) {
        return Err(Error::Dimension {
            expected: SURROGATE_INPUTS,
            actual: p.input.len(),
        });
    }
    if pairs.iter().any(|p| !p.target.is_finite() || p.input.iter().any(|x| !x.is_finite())) {
        return Err(Error::validation(alloc::format!("{name} training pairs contain non-finite values")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (indicator.index() as u64) << 32);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);
    let holdout = math::round(pairs.len() as f64 * cfg.holdout_fraction) as usize;
    let (holdout_idx, train_idx) = order.split_at(holdout.min(pairs.len() - 1));

    let train_targets: Vec<f64> = train_idx.iter().map(|&i| pairs[i].target).collect();
    let lo = train_targets.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = train_targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::validation(alloc::format!("{name} targets have zero variance")));
    }
    let target = FeatureRange::new(lo, hi);

    let rows: Vec<&[f64]> = train_idx.iter().map(|&i| pairs[i].input.as_slice()).collect();
    let mut norm = NormalizationParams::fit(&rows)?;
    // Columns constant over the training rows are centred on their value so
    // they reach the network as zero rather than in raw units.
    for r in &mut norm.ranges {
        if r.is_constant() {
            *r = FeatureRange::new(r.min, r.min + math::abs(r.min).max(1.0));
        }
    }
    let scaled = |i: usize| -> Result<(Vec<f64>, f64)> {
        Ok((norm.apply(&pairs[i].input)?, minmax_apply(pairs[i].target, target)))
    };
    let train: Vec<(Vec<f64>, f64)> = train_idx.iter().map(|&i| scaled(i)).collect::<Result<_>>()?;

    let mut sizes = alloc::vec![SURROGATE_INPUTS];
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(1);
    let mut model = Mlp::new(&sizes, Head::Linear, cfg.seed.wrapping_add(indicator.index() as u64))?;
    let mut opt = Optimizer::adam(cfg.learning_rate)?;
    let mut grads = model.zero_gradients();
    let mut batch_order: Vec<usize> = (0..train.len()).collect();
    let mut cache = model.forward(&train[0].0)?;
    for _ in 0..cfg.epochs {
        batch_order.shuffle(&mut rng);
        for chunk in batch_order.chunks(cfg.batch_size) {
            grads.zero();
            let scale = 2.0 / chunk.len() as f64;
            for &j in chunk {
                let (x, t) = &train[j];
                model.forward_into(x, &mut cache)?;
                let err = cache.output()[0] - t;
                model.backward(&cache, &[scale * err], &mut grads)?;
            }
            opt.step(&mut model, &grads)?;
        }
    }

    let provisional = SurrogatePair {
        iri_model: model.clone(),
        rd_model: model.clone(),
        iri_norm: norm.clone(),
        rd_norm: norm.clone(),
        iri_target: target,
        rd_target: target,
        epoch_year: cfg.epoch_year,
    };
    let evaluate = |idx: &[usize]| -> Result<(f64, f64)> {
        if idx.is_empty() {
            return Ok((0.0, 0.0));
        }
        let mut preds = Vec::with_capacity(idx.len());
        for &i in idx {
            let x = norm.apply(&pairs[i].input)?;
            preds.push(predict_next(&provisional, Indicator::Iri, &x, f64::INFINITY)?);
        }
        let targets: Vec<f64> = idx.iter().map(|&i| pairs[i].target).collect();
        Ok(regression_metrics(&preds, &targets))
    };
    let (train_rmse, train_r2) = evaluate(train_idx)?;
    let (holdout_rmse, holdout_r2) = evaluate(holdout_idx)?;
    let fit = IndicatorFit {
        train_count: train_idx.len(),
        holdout_count: holdout_idx.len(),
        train_rmse,
        holdout_rmse,
        train_r2,
        holdout_r2,
    };
    Ok((model, norm, target, fit))
}

/// (RMSE, R²) of predictions against targets.
pub(crate) fn regression_metrics(preds: &[f64], targets: &[f64]) -> (f64, f64) {
    let n = targets.len() as f64;
    let mean = math::mean(targets);
    let sse: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    let sst: f64 = targets.iter().map(|t| (t - mean) * (t - mean)).sum();
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
    (math::sqrt(sse / n), r2)
}
