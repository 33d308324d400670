//! Run configuration: a single JSON document covering the contract rules,
//! solver knobs, grids and the ingestion settings. Every field has a default
//! so a missing config file means "run with the shipped defaults".

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tlou_core::consumption_data::IngestConfig;
use tlou_core::price_setter::{ContractRules, SolverConfig};
use tlou_core::{ContractRules64, SolverConfig64};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Time-of-Use baseline price both curves are anchored to (currency/kWh).
    pub baseline_price: f64,
    /// Booking fee window [min, max] (currency per kWh booked).
    pub booking_fee_bounds: [f64; 2],
    /// Per-step increase window for the higher curve.
    pub higher_step_increase_bounds: [f64; 2],
    /// Per-step decrease window for the lower curve.
    pub lower_step_decrease_bounds: [f64; 2],
    /// Floor under every price variable.
    pub price_floor: f64,
    /// Fixed breakpoint grid of the lower (discount) curve, kWh.
    pub lower_breakpoints: Vec<f64>,
    /// Fixed breakpoint grid of the higher (penalty) curve, kWh.
    pub higher_breakpoints: Vec<f64>,
    /// User inertia: required expected-cost advantage of the target.
    pub delta: f64,
    /// Relative slack on the stage-two revenue floor.
    pub lexicographic_slack: f64,
    /// Add user-optimality rows on the fly instead of all upfront.
    pub lazy_mode: bool,
    /// Scenario count requested from the discretizer.
    pub scenarios: usize,
    /// Minimum fraction of readings an hour needs to be kept.
    pub min_coverage: f64,
    /// Restrict processing to these hours; empty means all 24.
    pub hours: Vec<u8>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rules = ContractRules64::household_defaults();
        let solver = SolverConfig64::household_defaults();
        Self {
            baseline_price: solver.baseline(),
            booking_fee_bounds: rules.booking_fee_bounds(),
            higher_step_increase_bounds: rules.higher_step_increase_bounds(),
            lower_step_decrease_bounds: rules.lower_step_decrease_bounds(),
            price_floor: rules.price_floor(),
            lower_breakpoints: solver.lower_grid().to_vec(),
            higher_breakpoints: solver.higher_grid().to_vec(),
            delta: solver.delta(),
            lexicographic_slack: solver.lexicographic_slack(),
            lazy_mode: false,
            scenarios: 8,
            min_coverage: 0.5,
            hours: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                let cfg: RunConfig = serde_json::from_str(&text)
                    .with_context(|| format!("cannot parse config {}", p.display()))?;
                Ok(cfg)
            }
        }
    }

    pub fn contract_rules(&self) -> Result<ContractRules64> {
        ContractRules::new(
            self.booking_fee_bounds,
            self.higher_step_increase_bounds,
            self.lower_step_decrease_bounds,
            self.price_floor,
        )
        .context("invalid contract rules in config")
    }

    pub fn solver_config(&self) -> Result<SolverConfig64> {
        let cfg = SolverConfig::new(
            self.delta,
            self.baseline_price,
            self.lower_breakpoints.clone(),
            self.higher_breakpoints.clone(),
        )
        .context("invalid solver settings in config")?
        .with_lexicographic_slack(self.lexicographic_slack)
        .context("invalid lexicographic slack in config")?;
        Ok(cfg.with_lazy_mode(self.lazy_mode))
    }

    pub fn ingest_config(&self) -> IngestConfig {
        IngestConfig { min_coverage: self.min_coverage, cadence_minutes: None }
    }

    pub fn selects_hour(&self, hour: u8) -> bool {
        self.hours.is_empty() || self.hours.contains(&hour)
    }
}
