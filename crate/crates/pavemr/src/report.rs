//! Plot-ready CSV and JSON outputs. Every writer is a pure function of its
//! inputs, so reruns produce byte-identical files.

use std::path::Path;

use serde::Serialize;

use pavemr_core::agents::{DqnEpisodeLog, PpoIterationLog};
use pavemr_core::domain::{build_action_catalog, TreatmentKind};
use pavemr_core::rewardlca::RewardLedger;
use pavemr_core::runner::{calendar_label, sensitivity_inversions, ComparisonReport, PlanReport, SensitivityRow};

use crate::error::Result;
use crate::io;

pub fn write_ppo_log(path: &Path, log: &[PpoIterationLog]) -> Result<()> {
    io::write_csv(path, log)
}

pub fn write_dqn_log(path: &Path, log: &[DqnEpisodeLog]) -> Result<()> {
    io::write_csv(path, log)
}

#[derive(Serialize)]
struct LedgerRow {
    segment: usize,
    step: u32,
    action_id: u8,
    area_iri: f64,
    area_rd: f64,
    discounted_cost: f64,
    effcost: f64,
    reward: f64,
}

/// Ledger entries of several trajectories, keyed by segment index.
pub fn write_ledgers<'a>(path: &Path, ledgers: impl IntoIterator<Item = &'a RewardLedger>) -> Result<()> {
    let rows = ledgers.into_iter().enumerate().flat_map(|(segment, l)| {
        l.entries().iter().map(move |e| LedgerRow {
            segment,
            step: e.step,
            action_id: e.action_id,
            area_iri: e.areas[0],
            area_rd: e.areas[1],
            discounted_cost: e.discounted_cost,
            effcost: e.effcost,
            reward: e.reward,
        })
    });
    io::write_csv(path, rows)
}

#[derive(Serialize)]
struct PlanSummary {
    segments: usize,
    horizon_years: usize,
    start_year: i32,
    mean_final_effcost: f64,
    total_discounted_cost: f64,
}

/// Writes `distribution.csv`, `yearly_cost.csv`, `segment_plans.csv`,
/// `ledgers.csv` and `summary.json` into `dir`.
pub fn write_plan_report(dir: &Path, report: &PlanReport, start_year: i32) -> Result<()> {
    let years = report.distribution.len();
    let mut header = vec!["year".to_string(), "calendar_year".to_string()];
    header.extend(TreatmentKind::REPORT_ORDER.iter().map(|k| k.name().to_string()));
    let rows: Vec<Vec<String>> = report
        .distribution
        .iter()
        .enumerate()
        .map(|(y, shares)| {
            let year = y as u32 + 1;
            let mut r = vec![year.to_string(), calendar_label(start_year, year).to_string()];
            r.extend(shares.iter().map(|&p| io::num(p)));
            r
        })
        .collect();
    io::write_records(&dir.join("distribution.csv"), &header, &rows)?;

    let header = ["year", "calendar_year", "discounted_cost"].map(String::from);
    let rows: Vec<Vec<String>> = report
        .yearly_cost
        .iter()
        .enumerate()
        .map(|(y, &c)| {
            let year = y as u32 + 1;
            vec![year.to_string(), calendar_label(start_year, year).to_string(), io::num(c)]
        })
        .collect();
    io::write_records(&dir.join("yearly_cost.csv"), &header, &rows)?;

    let catalog = build_action_catalog();
    let header = ["segment", "year", "calendar_year", "action_id", "kind", "iri", "rd", "discounted_cost"].map(String::from);
    let mut rows = Vec::new();
    for (s, plan) in report.plans.iter().enumerate() {
        for (y, ((&a, &(iri, rd)), cost)) in plan
            .actions
            .iter()
            .zip(plan.trajectory.iter().skip(1))
            .zip(plan.yearly_costs())
            .enumerate()
        {
            let year = y as u32 + 1;
            let kind = catalog.get(a as usize)?.kind.name();
            rows.push(vec![
                s.to_string(),
                year.to_string(),
                calendar_label(start_year, year).to_string(),
                a.to_string(),
                kind.to_string(),
                io::num(iri),
                io::num(rd),
                io::num(cost),
            ]);
        }
    }
    io::write_records(&dir.join("segment_plans.csv"), &header, &rows)?;
    write_ledgers(&dir.join("ledgers.csv"), report.plans.iter().map(|p| &p.ledger))?;
    io::write_json(
        &dir.join("summary.json"),
        &PlanSummary {
            segments: report.plans.len(),
            horizon_years: years,
            start_year,
            mean_final_effcost: report.mean_final_effcost(),
            total_discounted_cost: report.yearly_cost.iter().sum(),
        },
    )
}

#[derive(Serialize)]
struct SensitivitySummary<'a> {
    retrained: bool,
    inversions: usize,
    inversions_within_one_std: bool,
    rows: &'a [SensitivityRow],
}

pub fn write_sensitivity(dir: &Path, rows: &[SensitivityRow], retrained: bool) -> Result<()> {
    io::write_csv(&dir.join("sensitivity.csv"), rows)?;
    let (inversions, within) = sensitivity_inversions(rows);
    io::write_json(
        &dir.join("sensitivity.json"),
        &SensitivitySummary {
            retrained,
            inversions,
            inversions_within_one_std: within,
            rows,
        },
    )
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    agent: &'a str,
    env_steps: u64,
    final_mean_reward: f64,
    steps_to_threshold: Option<f64>,
    curve_variance: f64,
    fewer_steps: bool,
}

/// Writes `curves.csv` (both agents, keyed by name), `summary.csv` and the
/// full report as `comparison.json`.
pub fn write_comparison(dir: &Path, report: &ComparisonReport) -> Result<()> {
    io::write_csv(&dir.join("curves.csv"), &report.curves)?;
    io::write_csv(
        &dir.join("summary.csv"),
        report.summaries.iter().map(|s| SummaryRow {
            agent: &s.agent,
            env_steps: s.env_steps,
            final_mean_reward: s.final_mean_reward,
            steps_to_threshold: s.steps_to_threshold,
            curve_variance: s.curve_variance,
            fewer_steps: report.fewer_steps.as_deref() == Some(s.agent.as_str()),
        }),
    )?;
    io::write_json(&dir.join("comparison.json"), report)
}
