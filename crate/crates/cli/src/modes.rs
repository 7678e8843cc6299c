//! Mode names accepted on the command line and their resolution.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::ValueEnum;
use srlab_core::distopt::{optimize_preset, Preset, PsoConfig, DEFAULT_GRID_SIZE};
use srlab_core::{DeterministicMode, ProbabilityTable, RoundingMode};

use crate::distfile::DistributionFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Floor,
    Ceil,
    HalfUp,
    HalfDown,
    HalfEven,
    HalfOdd,
    /// Round half to even.
    Cr,
    Sr,
    /// Table from `--table` with label D1, else the D1 preset.
    D1,
    /// Table from `--table` with label D2, else the D2 preset.
    D2,
    /// Tables given with `--table`.
    Table,
}

impl ModeName {
    pub fn token(self) -> &'static str {
        match self {
            ModeName::Floor => "floor",
            ModeName::Ceil => "ceil",
            ModeName::HalfUp => "half-up",
            ModeName::HalfDown => "half-down",
            ModeName::HalfEven => "half-even",
            ModeName::HalfOdd => "half-odd",
            ModeName::Cr => "cr",
            ModeName::Sr => "sr",
            ModeName::D1 => "d1",
            ModeName::D2 => "d2",
            ModeName::Table => "table",
        }
    }

    fn deterministic(self) -> Option<DeterministicMode> {
        Some(match self {
            ModeName::Floor => DeterministicMode::Floor,
            ModeName::Ceil => DeterministicMode::Ceiling,
            ModeName::HalfUp => DeterministicMode::HalfUp,
            ModeName::HalfDown => DeterministicMode::HalfDown,
            ModeName::HalfEven | ModeName::Cr => DeterministicMode::HalfEven,
            ModeName::HalfOdd => DeterministicMode::HalfOdd,
            _ => return None,
        })
    }

    fn preset(self) -> Option<Preset> {
        match self {
            ModeName::D1 => Some(Preset::D1),
            ModeName::D2 => Some(Preset::D2),
            _ => None,
        }
    }
}

pub const DEFAULT_MODES: [ModeName; 4] = [ModeName::Sr, ModeName::Cr, ModeName::D1, ModeName::D2];

/// A resolved mode and the name it is reported under.
#[derive(Debug, Clone)]
pub struct NamedMode {
    pub name: String,
    pub mode: RoundingMode,
}

pub fn load_tables(paths: &[PathBuf]) -> Result<Vec<ProbabilityTable>> {
    paths
        .iter()
        .map(|p| DistributionFile::read(p)?.table())
        .collect()
}

/// Expands mode names against the loaded tables.
///
/// `d1`/`d2` take a loaded table with a matching label when there is one and
/// otherwise optimize the preset with default swarm settings. Remaining
/// tables are placed where `table` appears, or appended at the end.
pub fn resolve(names: &[ModeName], tables: &[ProbabilityTable]) -> Result<Vec<NamedMode>> {
    let mut used = vec![false; tables.len()];
    let mut slots: Vec<Option<NamedMode>> = Vec::new();
    let mut table_slot = None;
    for &name in names {
        if let Some(d) = name.deterministic() {
            slots.push(Some(NamedMode {
                name: name.token().into(),
                mode: RoundingMode::Deterministic(d),
            }));
        } else if let Some(preset) = name.preset() {
            let found = tables
                .iter()
                .position(|t| t.label().eq_ignore_ascii_case(preset.label()));
            let table = match found {
                Some(i) => {
                    used[i] = true;
                    tables[i].clone()
                }
                None => optimize_preset(preset, DEFAULT_GRID_SIZE, &PsoConfig::default())?,
            };
            slots.push(Some(NamedMode {
                name: name.token().into(),
                mode: RoundingMode::StochasticTable(table),
            }));
        } else if name == ModeName::Sr {
            slots.push(Some(NamedMode {
                name: name.token().into(),
                mode: RoundingMode::StochasticSR,
            }));
        } else if table_slot.is_none() {
            table_slot = Some(slots.len());
            slots.push(None);
        }
    }
    let rest: Vec<NamedMode> = tables
        .iter()
        .zip(&used)
        .filter(|(_, &u)| !u)
        .map(|(t, _)| NamedMode {
            name: t.label().to_string(),
            mode: RoundingMode::StochasticTable(t.clone()),
        })
        .collect();
    if table_slot.is_some() && rest.is_empty() {
        bail!("mode 'table' needs at least one --table file");
    }
    let mut out = Vec::new();
    let mut rest = Some(rest);
    for slot in slots {
        match slot {
            Some(m) => out.push(m),
            None => out.extend(rest.take().unwrap_or_default()),
        }
    }
    out.extend(rest.unwrap_or_default());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(label: &str) -> ProbabilityTable {
        ProbabilityTable::from_fn(3, label, |f| 1.0 - f).unwrap()
    }

    #[test]
    fn builtins_keep_order_and_names() {
        let got = resolve(&[ModeName::Sr, ModeName::Cr, ModeName::Floor], &[]).unwrap();
        let names: Vec<_> = got.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["sr", "cr", "floor"]);
        assert_eq!(
            got[1].mode,
            RoundingMode::Deterministic(DeterministicMode::HalfEven)
        );
    }

    #[test]
    fn labelled_tables_fill_presets() {
        let tables = [table("mine"), table("D1")];
        let got = resolve(&[ModeName::D1, ModeName::Sr], &tables).unwrap();
        let names: Vec<_> = got.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["d1", "sr", "mine"]);
        assert_eq!(
            got[0].mode,
            RoundingMode::StochasticTable(tables[1].clone())
        );
    }

    #[test]
    fn table_marker_positions_tables() {
        let tables = [table("a"), table("b")];
        let got = resolve(&[ModeName::Table, ModeName::Sr], &tables).unwrap();
        let names: Vec<_> = got.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "sr"]);
    }

    #[test]
    fn table_marker_without_tables_is_an_error() {
        assert!(resolve(&[ModeName::Table], &[]).is_err());
    }
}
