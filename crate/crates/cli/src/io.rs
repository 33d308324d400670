//! Readers and writers for every file the CLI emits. Each emitted format has
//! a reader here so outputs can be round-tripped and cross-checked.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tlou_core::consumption_data::DiscreteDistribution;
use tlou_core::{DiscreteDistribution64, Menu64, PricingOption64};

/// One entry of `distributions.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub hour: u8,
    pub loads: Vec<f64>,
    pub probs: Vec<f64>,
    pub n_samples: usize,
}

impl DistributionRecord {
    pub fn from_distribution(dist: &DiscreteDistribution64, n_samples: usize) -> Self {
        Self {
            hour: dist.time_frame(),
            loads: dist.loads().to_vec(),
            probs: dist.probs().to_vec(),
            n_samples,
        }
    }

    pub fn to_distribution(&self) -> Result<DiscreteDistribution64> {
        DiscreteDistribution::new(self.hour, self.loads.clone(), self.probs.clone())
            .with_context(|| format!("invalid distribution for hour {}", self.hour))
    }
}

pub fn write_distributions(path: &Path, records: &[DistributionRecord]) -> Result<()> {
    let text = serde_json::to_string_pretty(records)?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_distributions(path: &Path) -> Result<Vec<DistributionRecord>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let records: Vec<DistributionRecord> =
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    for r in &records {
        r.to_distribution()?;
    }
    Ok(records)
}

pub fn write_menu(path: &Path, menu: &Menu64) -> Result<()> {
    let text = serde_json::to_string_pretty(menu)?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_menu(path: &Path) -> Result<Menu64> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn read_pricing_option(path: &Path) -> Result<PricingOption64> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn write_pricing_option(path: &Path, option: &PricingOption64) -> Result<()> {
    let text = serde_json::to_string_pretty(option)?;
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Write a CSV of float columns under a fixed header.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 24 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Read a CSV written by [`write_csv`], checking the header.
pub fn read_csv(path: &Path, expected_header: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != expected_header {
        bail!(
            "{}: header mismatch: expected `{expected_header}`, found `{header}`",
            path.display()
        );
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse()).collect();
        rows.push(row.with_context(|| format!("{}: bad row {}", path.display(), i + 2))?);
    }
    Ok(rows)
}

pub const OPTIONS_PER_HOUR_HEADER: &str = "hour,option_count,zero_option";
pub const CAPACITY_LEVELS_HEADER: &str = "hour,capacity";
pub const DELTA_SWEEP_HEADER: &str = "hour,delta,nonzero_option_count";
pub const CURVE_PRICES_HEADER: &str = "capacity,lower_price,higher_price";
pub const CURVE_RELATIVE_HEADER: &str = "capacity,consumption,relative_cost";
pub const CURVE_EXPECTED_HEADER: &str = "capacity,expected_cost";
