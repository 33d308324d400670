//! Hand-checked fixtures shared across module tests.

use crate::consumption_data::DiscreteDistribution;
use crate::price_setter::{ContractRules, SolverConfig};
use crate::step_tariff::{StepFunction, TariffSetting};

/// K=0.1, baseline 1.0, lower {0:1.0, 2:0.8}, higher {0:1.0, 3:1.3}.
pub(crate) fn toy_setting() -> TariffSetting<f64> {
    TariffSetting::new(
        0.1,
        1.0,
        StepFunction::new(vec![0.0, 2.0], vec![1.0, 0.8]).unwrap(),
        StepFunction::new(vec![0.0, 3.0], vec![1.0, 1.3]).unwrap(),
    )
    .unwrap()
}

/// Loads (1, 2.5, 4) with probabilities (0.3, 0.5, 0.2); mean 2.35.
pub(crate) fn toy_dist() -> DiscreteDistribution<f64> {
    DiscreteDistribution::new(14, vec![1.0, 2.5, 4.0], vec![0.3, 0.5, 0.2]).unwrap()
}

/// Permissive contractual bounds used by solver tests.
pub(crate) fn toy_rules() -> ContractRules<f64> {
    ContractRules::new([0.01, 0.6], [0.01, 0.5], [0.01, 0.2], 0.01).unwrap()
}

/// delta 0.05, baseline 1.0, grids matching the toy curves.
pub(crate) fn toy_solver_config() -> SolverConfig<f64> {
    SolverConfig::new(0.05, 1.0, vec![0.0, 2.0], vec![0.0, 3.0]).unwrap()
}
