use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Dataset, RawDataset, RawSnapshot, SegmentHistory, Snapshot};
use crate::domain::TrafficProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputePolicy {
    Interpolate,
    FillForward,
    Delete,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputeReport {
    pub interpolated: usize,
    pub filled: usize,
    pub deleted: usize,
}

impl ImputeReport {
    pub fn merge(&mut self, other: ImputeReport) {
        self.interpolated += other.interpolated;
        self.filled += other.filled;
        self.deleted += other.deleted;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Imputed {
    pub values: Vec<f64>,
    /// Indices of the input that survive (all of them unless `Delete`).
    pub kept: Vec<usize>,
    pub report: ImputeReport,
}

/// Repairs missing entries using their index as the position axis.
pub fn impute(values: &[Option<f64>], policy: ImputePolicy) -> Result<Imputed> {
    let positions: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    impute_at(values, &positions, policy)
}

/// Repairs missing entries; interpolation is linear in `positions`.
///
/// Leading or trailing gaps under `Interpolate` take the nearest known value.
/// Leading gaps under `FillForward` are back-filled from the first known value.
pub fn impute_at(values: &[Option<f64>], positions: &[f64], policy: ImputePolicy) -> Result<Imputed> {
    if values.len() != positions.len() {
        return Err(Error::Dimension {
            expected: values.len(),
            actual: positions.len(),
        });
    }
    let mut report = ImputeReport::default();
    if policy == ImputePolicy::Delete {
        let kept: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
        report.deleted = values.len() - kept.len();
        let out = kept.iter().map(|&i| values[i].expect("kept")).collect();
        return Ok(Imputed { values: out, kept, report });
    }
    let known: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_some()).collect();
    if known.is_empty() && !values.is_empty() {
        return Err(Error::validation("column has no observed values to impute from"));
    }
    let mut out = Vec::with_capacity(values.len());
    let mut last_known: Option<f64> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(x) = *v {
            out.push(x);
            last_known = Some(x);
            continue;
        }
        let fixed = match policy {
            ImputePolicy::FillForward => {
                report.filled += 1;
                last_known.unwrap_or_else(|| values[known[0]].expect("known"))
            }
            ImputePolicy::Interpolate => {
                report.interpolated += 1;
                let next = known.iter().copied().find(|&k| k > i);
                let prev = known.iter().copied().rev().find(|&k| k < i);
                match (prev, next) {
                    (Some(p), Some(n)) => {
                        let (xp, xn) = (values[p].expect("known"), values[n].expect("known"));
                        let w = (positions[i] - positions[p]) / (positions[n] - positions[p]);
                        xp + w * (xn - xp)
                    }
                    (Some(p), None) => values[p].expect("known"),
                    (None, Some(n)) => values[n].expect("known"),
                    (None, None) => unreachable!("known is non-empty"),
                }
            }
            ImputePolicy::Delete => unreachable!(),
        };
        out.push(fixed);
    }
    Ok(Imputed {
        values: out,
        kept: (0..values.len()).collect(),
        report,
    })
}

/// Policy per dataset column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImputationConfig {
    pub iri: ImputePolicy,
    pub rd: ImputePolicy,
    pub truck_ratio: ImputePolicy,
    pub annual_esal: ImputePolicy,
    pub annual_aadt: ImputePolicy,
    pub annual_precipitation: ImputePolicy,
    pub freeze_thaw_cycles: ImputePolicy,
}

impl Default for ImputationConfig {
    fn default() -> Self {
        Self {
            iri: ImputePolicy::Delete,
            rd: ImputePolicy::Delete,
            truck_ratio: ImputePolicy::FillForward,
            annual_esal: ImputePolicy::Interpolate,
            annual_aadt: ImputePolicy::Interpolate,
            annual_precipitation: ImputePolicy::Interpolate,
            freeze_thaw_cycles: ImputePolicy::Interpolate,
        }
    }
}

type Column = fn(&RawSnapshot) -> Option<f64>;

/// Applies the per-column policies to every segment. Rows with a missing
/// value in a `Delete` column are dropped before the other columns are
/// repaired, so interpolation only sees surviving rows.
pub fn impute_dataset(raw: &RawDataset, cfg: &ImputationConfig) -> Result<(Dataset, ImputeReport)> {
    let columns: [(&str, Column, ImputePolicy); 7] = [
        ("iri", |s| s.iri, cfg.iri),
        ("rd", |s| s.rd, cfg.rd),
        ("truck_ratio", |s| s.truck_ratio, cfg.truck_ratio),
        ("annual_esal", |s| s.annual_esal, cfg.annual_esal),
        ("annual_aadt", |s| s.annual_aadt, cfg.annual_aadt),
        ("annual_precipitation", |s| s.annual_precipitation, cfg.annual_precipitation),
        ("freeze_thaw_cycles", |s| s.freeze_thaw_cycles, cfg.freeze_thaw_cycles),
    ];
    let mut total = ImputeReport::default();
    let mut segments = Vec::with_capacity(raw.segments.len());
    for seg in &raw.segments {
        let surviving: Vec<&RawSnapshot> = seg
            .snapshots
            .iter()
            .filter(|s| {
                columns
                    .iter()
                    .all(|(_, get, policy)| *policy != ImputePolicy::Delete || get(s).is_some())
            })
            .collect();
        total.deleted += seg.snapshots.len() - surviving.len();
        let positions: Vec<f64> = surviving.iter().map(|s| s.date.0 as f64).collect();
        let mut filled: Vec<Vec<f64>> = Vec::with_capacity(columns.len());
        for (name, get, policy) in &columns {
            let col: Vec<Option<f64>> = surviving.iter().map(|s| get(s)).collect();
            let policy = if *policy == ImputePolicy::Delete {
                // already complete after row deletion
                ImputePolicy::FillForward
            } else {
                *policy
            };
            let repaired = impute_at(&col, &positions, policy).map_err(|e| match e {
                Error::Validation(msg) => Error::Validation(alloc::format!(
                    "segment {} column {name}: {msg}",
                    seg.segment_id
                )),
                other => other,
            })?;
            total.merge(repaired.report);
            filled.push(repaired.values);
        }
        let snapshots = surviving
            .iter()
            .enumerate()
            .map(|(i, s)| Snapshot {
                date: s.date,
                iri: filled[0][i],
                rd: filled[1][i],
                traffic: TrafficProfile {
                    truck_ratio: filled[2][i],
                    annual_esal: filled[3][i],
                    annual_aadt: filled[4][i],
                },
                annual_precipitation: filled[5][i],
                freeze_thaw_cycles: filled[6][i],
            })
            .collect();
        segments.push(SegmentHistory {
            segment_id: String::from(seg.segment_id.as_str()),
            structure: seg.structure,
            freeze: seg.freeze,
            moisture: seg.moisture,
            snapshots,
            actions: seg.actions.clone(),
        });
    }
    Ok((Dataset { segments }, total))
}
