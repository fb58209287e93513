//! Delimited-text history files.
//!
//! A history CSV is UTF-8, comma-separated, with a header row. Columns may
//! appear in any order; every column except `action_id` is mandatory.
//!
//! | column | content |
//! |---|---|
//! | `segment_id` | segment identifier |
//! | `date` | observation date, `YYYY-MM-DD` |
//! | `iri` | roughness, m/km |
//! | `rd` | rut depth, mm |
//! | `truck_ratio` | truck share, 0..=1 |
//! | `annual_esal` | equivalent single-axle loads per year |
//! | `annual_aadt` | annual average daily traffic |
//! | `annual_precipitation` | mm/yr |
//! | `freeze_thaw_cycles` | cycles/yr |
//! | `{surface,binder,base,subbase}_type` | layer-type code |
//! | `{surface,binder,base,subbase}_thickness_mm` | layer thickness |
//! | `{surface,binder,base,subbase}_material` | material code |
//! | `freeze_zone` | `freeze` or `non-freeze` |
//! | `moisture_zone` | `wet` or `dry` |
//! | `action_id` | optional maintenance action id, 0..=31 |
//!
//! Numeric cells may be empty (missing). A row with an `action_id` and no
//! indicator, traffic or climate values records only the action. Structure
//! and zone cells may be left empty after a segment's first row; values that
//! are given must agree across the segment. Rows are sorted by date within
//! each segment; segments keep the order of their first row.

use std::collections::HashMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use pavemr_core::dataprep::{
    ActionEvent, Dataset, DatasetChange, DayStamp, NormalizationParams, RawDataset, RawSegment, RawSnapshot,
    TrainingPair, SURROGATE_INPUTS, SURROGATE_INPUT_NAMES,
};
use pavemr_core::domain::{FreezeZone, Layer, MoistureZone, StructureProfile, Vocabulary, ACTION_COUNT};

use crate::error::{Error, Result};
use crate::io;

const MEASURES: [&str; 7] = [
    "iri",
    "rd",
    "truck_ratio",
    "annual_esal",
    "annual_aadt",
    "annual_precipitation",
    "freeze_thaw_cycles",
];
const LAYERS: [&str; 4] = ["surface", "binder", "base", "subbase"];

/// Header of a history CSV in canonical order.
pub fn history_header() -> Vec<String> {
    let mut h = vec!["segment_id".to_string(), "date".to_string()];
    h.extend(MEASURES.iter().map(|s| s.to_string()));
    for l in LAYERS {
        for suffix in ["type", "thickness_mm", "material"] {
            h.push(format!("{l}_{suffix}"));
        }
    }
    h.extend(["freeze_zone", "moisture_zone", "action_id"].map(String::from));
    h
}

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date")
}

pub fn parse_date(s: &str) -> Option<DayStamp> {
    let d = NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()?;
    i32::try_from((d - epoch()).num_days()).ok().map(DayStamp)
}

pub fn format_date(d: DayStamp) -> String {
    let date = epoch() + chrono::Duration::days(d.0 as i64);
    format!("{:04}-{:02}-{:02}", date.year(), date.month(), date.day())
}

#[derive(Default)]
struct SegmentBuild {
    first_line: usize,
    structure: Option<StructureProfile>,
    freeze: Option<FreezeZone>,
    moisture: Option<MoistureZone>,
    snapshots: Vec<(usize, RawSnapshot)>,
    actions: Vec<ActionEvent>,
}

/// Parses a history CSV; `path` only labels errors.
pub fn parse_history(text: &str, path: &Path, vocab: &Vocabulary) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();
    let missing: Vec<String> = history_header()
        .into_iter()
        .filter(|c| c != "action_id" && !index.contains_key(c.as_str()))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!("{}: missing columns: {}", path.display(), missing.join(", "))));
    }
    let col = |name: &str| index[name];
    let action_col = index.get("action_id").copied();

    let mut order: Vec<String> = Vec::new();
    let mut segments: HashMap<String, SegmentBuild> = HashMap::new();
    let mut errors: Vec<String> = Vec::new();

    for (n, record) in reader.records().enumerate() {
        let line = n + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                errors.push(format!("line {line}: {e}"));
                continue;
            }
        };
        let cell = |name: &str| record.get(col(name)).unwrap_or("");
        let mut row_errors = Vec::new();
        let mut number = |name: &str| -> Option<f64> {
            let s = cell(name);
            if s.is_empty() {
                return None;
            }
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Some(v),
                _ => {
                    row_errors.push(format!("{name}: not a number `{s}`"));
                    None
                }
            }
        };
        let values: Vec<Option<f64>> = MEASURES.iter().map(|m| number(m)).collect();
        let thickness: Vec<Option<f64>> = LAYERS.iter().map(|l| number(&format!("{l}_thickness_mm"))).collect();

        let segment_id = cell("segment_id").to_string();
        if segment_id.is_empty() {
            row_errors.push("segment_id is empty".to_string());
        }
        let date = parse_date(cell("date"));
        if date.is_none() {
            row_errors.push(format!("date: expected YYYY-MM-DD, found `{}`", cell("date")));
        }
        let action = match action_col.map(|i| record.get(i).unwrap_or("")) {
            None | Some("") => None,
            Some(s) => match s.parse::<u8>() {
                Ok(id) if (id as usize) < ACTION_COUNT => Some(id),
                _ => {
                    row_errors.push(format!("action_id: expected 0..={}, found `{s}`", ACTION_COUNT - 1));
                    None
                }
            },
        };

        let structure_given = LAYERS
            .iter()
            .any(|l| ["type", "material"].iter().any(|s| !cell(&format!("{l}_{s}")).is_empty()))
            || thickness.iter().any(Option::is_some);
        let mut structure = None;
        if structure_given {
            let mut layers = Vec::with_capacity(4);
            for (l, t) in LAYERS.iter().zip(&thickness) {
                let kind = vocab.layer_type(cell(&format!("{l}_type")));
                let material = vocab.material(cell(&format!("{l}_material")));
                match (kind, material, t) {
                    (Ok(kind), Ok(material), Some(t)) => layers.push(Layer {
                        kind,
                        thickness_mm: *t,
                        material,
                    }),
                    (k, m, t) => {
                        for e in [k.err(), m.err()].into_iter().flatten() {
                            row_errors.push(format!("{l}: {e}"));
                        }
                        if t.is_none() {
                            row_errors.push(format!("{l}_thickness_mm is empty"));
                        }
                    }
                }
            }
            if let [surface, binder, base, subbase] = layers[..] {
                structure = Some(StructureProfile {
                    surface,
                    binder,
                    base,
                    subbase,
                });
            }
        }
        let freeze = match cell("freeze_zone") {
            "" => None,
            s => FreezeZone::parse(s).map_err(|e| row_errors.push(e.to_string())).ok(),
        };
        let moisture = match cell("moisture_zone") {
            "" => None,
            s => MoistureZone::parse(s).map_err(|e| row_errors.push(e.to_string())).ok(),
        };

        let action_only = action.is_some() && values.iter().all(Option::is_none);
        if !row_errors.is_empty() {
            errors.extend(row_errors.into_iter().map(|e| format!("line {line}: {e}")));
            continue;
        }
        let date = date.expect("checked above");
        let seg = segments.entry(segment_id.clone()).or_insert_with(|| {
            order.push(segment_id.clone());
            SegmentBuild {
                first_line: line,
                ..SegmentBuild::default()
            }
        });
        let mut conflict = |what: &str| errors.push(format!("line {line}: {what} differs from line {}", seg.first_line));
        match (structure, seg.structure) {
            (Some(s), Some(prev)) if s != prev => conflict("structure"),
            (Some(s), None) => seg.structure = Some(s),
            _ => {}
        }
        match (freeze, seg.freeze) {
            (Some(z), Some(prev)) if z != prev => conflict("freeze_zone"),
            (Some(z), None) => seg.freeze = Some(z),
            _ => {}
        }
        match (moisture, seg.moisture) {
            (Some(z), Some(prev)) if z != prev => conflict("moisture_zone"),
            (Some(z), None) => seg.moisture = Some(z),
            _ => {}
        }
        if let Some(action_id) = action {
            seg.actions.push(ActionEvent { date, action_id });
        }
        if !action_only {
            seg.snapshots.push((
                line,
                RawSnapshot {
                    date,
                    iri: values[0],
                    rd: values[1],
                    truck_ratio: values[2],
                    annual_esal: values[3],
                    annual_aadt: values[4],
                    annual_precipitation: values[5],
                    freeze_thaw_cycles: values[6],
                },
            ));
        }
    }

    let mut out = RawDataset::default();
    for id in order {
        let mut seg = segments.remove(&id).expect("every ordered id has a segment");
        let (Some(structure), Some(freeze), Some(moisture)) = (seg.structure, seg.freeze, seg.moisture) else {
            errors.push(format!("segment {id}: structure and zone columns are never filled in"));
            continue;
        };
        seg.snapshots.sort_by_key(|(_, s)| s.date);
        for w in seg.snapshots.windows(2) {
            if w[0].1.date == w[1].1.date {
                errors.push(format!("line {}: segment {id} already has a row dated {}", w[1].0, format_date(w[1].1.date)));
            }
        }
        seg.actions.sort_by_key(|a| a.date);
        out.segments.push(RawSegment {
            segment_id: id,
            structure,
            freeze,
            moisture,
            snapshots: seg.snapshots.into_iter().map(|(_, s)| s).collect(),
            actions: seg.actions,
        });
    }
    if !errors.is_empty() {
        return Err(Error::format(path, errors.join("\n")));
    }
    if out.segments.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    Ok(out)
}

pub fn load_history(path: &Path, vocab: &Vocabulary) -> Result<RawDataset> {
    parse_history(&io::read_text(path)?, path, vocab)
}

fn code_name(list: &[String], code: u16) -> String {
    list.get(code as usize).cloned().unwrap_or_default()
}

fn fixed_cells(seg_id: &str, structure: &StructureProfile, freeze: FreezeZone, moisture: MoistureZone, vocab: &Vocabulary) -> (String, Vec<String>) {
    let mut s = Vec::new();
    for l in structure.layers() {
        s.push(code_name(&vocab.layer_types, l.kind.0));
        s.push(io::num(l.thickness_mm));
        s.push(code_name(&vocab.materials, l.material.0));
    }
    s.push(freeze.label().to_string());
    s.push(moisture.label().to_string());
    (seg_id.to_string(), s)
}

/// Writes a repaired dataset in the history schema, one row per snapshot
/// and one action-only row per action.
pub fn write_dataset(path: &Path, dataset: &Dataset, vocab: &Vocabulary) -> Result<()> {
    let mut rows = Vec::new();
    for seg in &dataset.segments {
        let (id, fixed) = fixed_cells(&seg.segment_id, &seg.structure, seg.freeze, seg.moisture, vocab);
        let mut dated: Vec<(DayStamp, u8, Vec<String>)> = Vec::new();
        for s in &seg.snapshots {
            let measures = [
                s.iri,
                s.rd,
                s.traffic.truck_ratio,
                s.traffic.annual_esal,
                s.traffic.annual_aadt,
                s.annual_precipitation,
                s.freeze_thaw_cycles,
            ];
            let mut row = vec![id.clone(), format_date(s.date)];
            row.extend(measures.iter().map(|&v| io::num(v)));
            row.extend(fixed.iter().cloned());
            row.push(String::new());
            dated.push((s.date, 0, row));
        }
        for a in &seg.actions {
            let mut row = vec![id.clone(), format_date(a.date)];
            row.extend(std::iter::repeat_n(String::new(), MEASURES.len()));
            row.extend(fixed.iter().cloned());
            row.push(a.action_id.to_string());
            dated.push((a.date, 1, row));
        }
        dated.sort_by_key(|(d, k, _)| (*d, *k));
        rows.extend(dated.into_iter().map(|(_, _, r)| r));
    }
    io::write_records(path, &history_header(), &rows)
}

#[derive(Serialize)]
struct ChangeRow<'a> {
    segment_id: &'a str,
    indicator: &'static str,
    date: String,
    original: f64,
    calibrated: f64,
}

pub fn write_changes(path: &Path, changes: &[DatasetChange]) -> Result<()> {
    io::write_csv(
        path,
        changes.iter().map(|c| ChangeRow {
            segment_id: &c.segment_id,
            indicator: c.indicator.name(),
            date: format_date(c.date),
            original: c.original,
            calibrated: c.calibrated,
        }),
    )
}

fn pairs_header() -> Vec<String> {
    let mut h = vec!["segment_id".to_string()];
    h.extend(SURROGATE_INPUT_NAMES.iter().map(|s| s.to_string()));
    h.push("target".to_string());
    h
}

pub fn write_pairs(path: &Path, pairs: &[TrainingPair]) -> Result<()> {
    let rows: Vec<Vec<String>> = pairs
        .iter()
        .map(|p| {
            let mut r = vec![p.segment_id.clone()];
            r.extend(p.input.iter().map(|&x| io::num(x)));
            r.push(io::num(p.target));
            r
        })
        .collect();
    io::write_records(path, &pairs_header(), &rows)
}

pub fn load_pairs(path: &Path) -> Result<Vec<TrainingPair>> {
    let text = io::read_text(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::format(path, e.to_string()))?;
    let expected = pairs_header();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Schema(format!(
            "{}: pairs header must be segment_id, the {SURROGATE_INPUTS} input names and target",
            path.display()
        )));
    }
    let mut pairs = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, format!("line {}: {e}", n + 2)))?;
        let nums = record
            .iter()
            .skip(1)
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::format(path, format!("line {}: {e}", n + 2)))?;
        let (input, target) = nums.split_at(SURROGATE_INPUTS);
        pairs.push(TrainingPair {
            segment_id: record[0].to_string(),
            input: input.to_vec(),
            target: target[0],
        });
    }
    Ok(pairs)
}

/// Input ranges of the training pairs, per indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationFile {
    pub inputs: Vec<String>,
    pub iri: NormalizationParams,
    pub rd: NormalizationParams,
}

impl NormalizationFile {
    pub fn fit(iri: &[TrainingPair], rd: &[TrainingPair]) -> Result<Self> {
        let fit = |p: &[TrainingPair]| -> Result<NormalizationParams> {
            let rows: Vec<&[f64]> = p.iter().map(|p| p.input.as_slice()).collect();
            Ok(NormalizationParams::fit(&rows)?)
        };
        Ok(Self {
            inputs: SURROGATE_INPUT_NAMES.iter().map(|s| s.to_string()).collect(),
            iri: fit(iri)?,
            rd: fit(rd)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROW_TAIL: &str = "AC,50,AC-20,AC,75,PG-64-22,GB,250,CRUSHED-STONE,GS,200,GRAVEL,freeze,wet";

    fn csv(rows: &[&str]) -> String {
        let mut s = history_header().join(",");
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    fn parse(text: &str) -> Result<RawDataset> {
        parse_history(text, Path::new("h.csv"), &Vocabulary::standard())
    }

    #[test]
    fn dates_round_trip() {
        for s in ["1970-01-01", "1969-12-31", "2021-06-15", "2000-02-29"] {
            assert_eq!(format_date(parse_date(s).unwrap()), s);
        }
        assert_eq!(parse_date("1970-01-02"), Some(DayStamp(1)));
        assert_eq!(parse_date("2021-02-30"), None);
    }

    #[test]
    fn rows_are_sorted_and_action_rows_split_out() {
        let text = csv(&[
            &format!("A,2012-01-01,1.3,4,0.1,1e6,5e4,1000,40,{ROW_TAIL},"),
            &format!("A,2010-01-01,1.1,3,0.1,,5e4,1000,40,{ROW_TAIL},"),
            &format!("A,2011-06-01,,,,,,,,{ROW_TAIL},7"),
        ]);
        let ds = parse(&text).unwrap();
        let seg = &ds.segments[0];
        assert_eq!(seg.snapshots.len(), 2);
        assert!(seg.snapshots[0].date < seg.snapshots[1].date);
        assert_eq!(seg.snapshots[0].annual_esal, None);
        assert_eq!(seg.actions, vec![ActionEvent { date: parse_date("2011-06-01").unwrap(), action_id: 7 }]);
    }

    #[test]
    fn missing_mandatory_column_is_a_schema_error() {
        let text = "segment_id,date,iri\nA,2010-01-01,1.0\n";
        let err = parse(text).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn row_errors_carry_line_numbers() {
        let text = csv(&[
            &format!("A,2010-01-01,1.1,3,0.1,1e6,5e4,1000,40,{ROW_TAIL},"),
            &format!("A,2010-13-01,abc,3,0.1,1e6,5e4,1000,40,{ROW_TAIL},99"),
        ]);
        let msg = parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line 3: iri"), "{msg}");
        assert!(msg.contains("line 3: date"), "{msg}");
        assert!(msg.contains("line 3: action_id"), "{msg}");
    }

    #[test]
    fn unknown_codes_and_conflicts_are_reported() {
        let bad = ROW_TAIL.replace("AC-20", "AC-99");
        let text = csv(&[&format!("A,2010-01-01,1.1,3,0.1,1e6,5e4,1000,40,{bad},")]);
        assert!(parse(&text).unwrap_err().to_string().contains("AC-99"));

        let dry = ROW_TAIL.replace("wet", "dry");
        let text = csv(&[
            &format!("A,2010-01-01,1.1,3,0.1,1e6,5e4,1000,40,{ROW_TAIL},"),
            &format!("A,2011-01-01,1.2,3,0.1,1e6,5e4,1000,40,{dry},"),
        ]);
        assert!(parse(&text).unwrap_err().to_string().contains("moisture_zone differs"));
    }

    #[test]
    fn structure_may_be_given_once() {
        let text = csv(&[
            &format!("A,2010-01-01,1.1,3,0.1,1e6,5e4,1000,40,{ROW_TAIL},"),
            "A,2011-01-01,1.2,3,0.1,1e6,5e4,1000,40,,,,,,,,,,,,,,,",
        ]);
        assert_eq!(parse(&text).unwrap().segments[0].snapshots.len(), 2);
    }
}
