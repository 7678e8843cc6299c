//! On-disk form of an optimized probability table.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use srlab_core::distopt::{MopConfig, PsoConfig};
use srlab_core::ProbabilityTable;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub mop: MopConfig,
    pub pso: PsoConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionFile {
    pub format_version: u32,
    pub label: String,
    pub delta: f64,
    pub grid: Vec<f64>,
    pub p: Vec<f64>,
    pub provenance: Provenance,
}

impl DistributionFile {
    pub fn new(table: &ProbabilityTable, mop: MopConfig, pso: PsoConfig) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            label: table.label().to_string(),
            delta: mop.delta,
            grid: table.grid().to_vec(),
            p: table.p().to_vec(),
            provenance: Provenance {
                mop,
                pso,
                seed: pso.seed,
            },
        }
    }

    pub fn table(&self) -> Result<ProbabilityTable> {
        Ok(ProbabilityTable::new(
            self.grid.clone(),
            self.p.clone(),
            self.label.clone(),
        )?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DistributionFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            bail!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                file.format_version
            );
        }
        // Rejects files whose arrays do not form a valid table.
        file.table()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).with_context(|| format!("writing {}", path.display()))
    }
}
