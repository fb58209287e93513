use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed range of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Constant features have no spread and are passed through unscaled.
    pub fn is_constant(&self) -> bool {
        !(self.max > self.min)
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Scales `x` into `[0, 1]` over `range`. Constant ranges pass `x` through.
pub fn minmax_apply(x: f64, range: FeatureRange) -> f64 {
    if range.is_constant() {
        x
    } else {
        (x - range.min) / (range.max - range.min)
    }
}

pub fn minmax_invert(y: f64, range: FeatureRange) -> f64 {
    if range.is_constant() {
        y
    } else {
        y * (range.max - range.min) + range.min
    }
}

/// Per-feature min-max scaling parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ranges: Vec<FeatureRange>,
}

impl NormalizationParams {
    pub fn from_ranges(ranges: Vec<FeatureRange>) -> Self {
        Self { ranges }
    }

    /// Fits column ranges over `rows`. Every row must have the same width.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::validation("cannot fit normalization on an empty dataset"))?;
        let width = first.as_ref().len();
        let mut ranges = alloc::vec![FeatureRange::new(f64::INFINITY, f64::NEG_INFINITY); width];
        for row in rows {
            let row = row.as_ref();
            if row.len() != width {
                return Err(Error::Dimension {
                    expected: width,
                    actual: row.len(),
                });
            }
            for (r, &x) in ranges.iter_mut().zip(row) {
                if !x.is_finite() {
                    return Err(Error::validation("non-finite value in normalization input"));
                }
                r.min = r.min.min(x);
                r.max = r.max.max(x);
            }
        }
        Ok(Self { ranges })
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Indices of features flagged as constant.
    pub fn constant_features(&self) -> Vec<usize> {
        self.ranges
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_constant())
            .map(|(i, _)| i)
            .collect()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.ranges.is_empty() {
            return Err(Error::config("normalization parameters have not been fitted"));
        }
        if n != self.ranges.len() {
            return Err(Error::Dimension {
                expected: self.ranges.len(),
                actual: n,
            });
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(x.iter()
            .zip(&self.ranges)
            .map(|(&v, &r)| minmax_apply(v, r))
            .collect())
    }

    pub fn apply_in_place(&self, x: &mut [f64]) -> Result<()> {
        self.check_len(x.len())?;
        for (v, &r) in x.iter_mut().zip(&self.ranges) {
            *v = minmax_apply(*v, r);
        }
        Ok(())
    }

    pub fn invert(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        Ok(y.iter()
            .zip(&self.ranges)
            .map(|(&v, &r)| minmax_invert(v, r))
            .collect())
    }
}
