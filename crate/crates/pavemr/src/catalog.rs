//! Action-catalog CSV export and the cost-catalog TOML file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pavemr_core::domain::{build_action_catalog, ActionCatalog};
use pavemr_core::rewardlca::{ActionCost, CostCatalog, EmissionsInventory};

use crate::error::{Error, Result};
use crate::io;

#[derive(Serialize)]
struct CatalogRow {
    id: u8,
    kind: &'static str,
    thickness_mm: Option<f64>,
    material: Option<&'static str>,
}

pub fn write_action_catalog(path: &Path, catalog: &ActionCatalog) -> Result<()> {
    io::write_csv(
        path,
        catalog.iter().map(|a| CatalogRow {
            id: a.id,
            kind: a.kind.name(),
            thickness_mm: a.thickness_mm,
            material: a.material.map(|m| m.code()),
        }),
    )
}

/// Per-stage emissions in kg, pollutants in the order
/// SO2, CO2, NOx, PM2.5, CO, CH4, N2O.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub id: u8,
    pub kind: String,
    pub economic_cost: f64,
    pub production: [f64; 7],
    pub transportation: [f64; 7],
    pub construction: [f64; 7],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostFile {
    /// Free-text provenance of the numbers.
    pub note: String,
    pub actions: Vec<CostEntry>,
}

impl CostFile {
    pub fn from_catalog(costs: &CostCatalog, note: &str) -> Self {
        let catalog = build_action_catalog();
        let actions = catalog
            .iter()
            .zip(&costs.entries)
            .map(|(a, c)| CostEntry {
                id: a.id,
                kind: a.kind.name().to_string(),
                economic_cost: c.economic_cost,
                production: c.emissions.kg[0],
                transportation: c.emissions.kg[1],
                construction: c.emissions.kg[2],
            })
            .collect();
        Self {
            note: note.to_string(),
            actions,
        }
    }

    pub fn to_catalog(&self, path: &Path) -> Result<CostCatalog> {
        let catalog = build_action_catalog();
        if self.actions.len() != catalog.len() {
            return Err(Error::format(
                path,
                format!("expected {} actions, found {}", catalog.len(), self.actions.len()),
            ));
        }
        let mut entries = Vec::with_capacity(catalog.len());
        for (a, e) in catalog.iter().zip(&self.actions) {
            if e.id != a.id || e.kind != a.kind.name() {
                return Err(Error::format(
                    path,
                    format!("entry {} is ({}, {}), expected ({}, {})", entries.len(), e.id, e.kind, a.id, a.kind.name()),
                ));
            }
            entries.push(ActionCost {
                economic_cost: e.economic_cost,
                emissions: EmissionsInventory {
                    kg: [e.production, e.transportation, e.construction],
                },
            });
        }
        let costs = CostCatalog { entries };
        costs.validate()?;
        Ok(costs)
    }
}

pub const PLACEHOLDER_NOTE: &str = "Placeholder costs for a 10980 m2 segment (500 m x 3.66 m x 6 lanes). \
Rough unit prices and hot-mix emission factors, not authoritative; replace with local data.";

pub fn load_costs(path: &Path) -> Result<CostCatalog> {
    io::read_toml::<CostFile>(path)?.to_catalog(path)
}

pub fn save_costs(path: &Path, costs: &CostCatalog, note: &str) -> Result<()> {
    io::write_toml(path, &CostFile::from_catalog(costs, note))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_file_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("costs.toml");
        let costs = CostCatalog::placeholder(10_980.0);
        save_costs(&path, &costs, PLACEHOLDER_NOTE).unwrap();
        assert_eq!(load_costs(&path).unwrap(), costs);
    }

    #[test]
    fn reordered_entries_are_rejected() {
        let mut file = CostFile::from_catalog(&CostCatalog::placeholder(100.0), "x");
        file.actions.swap(1, 2);
        assert!(file.to_catalog(Path::new("c")).is_err());
    }

    #[test]
    fn catalog_csv_has_32_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("actions.csv");
        write_action_catalog(&path, &build_action_catalog()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 33);
        assert!(text.starts_with("id,kind,thickness_mm,material\n0,DoNothing,,\n"));
    }
}
