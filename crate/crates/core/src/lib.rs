//! Supplier-side price setting for the Time-and-Level-of-Use (TLOU)
//! electricity tariff.
//!
//! TLOU extends a flat Time-of-Use price with a user-booked capacity: a
//! booking fee per kWh booked, a discounted price when consumption stays
//! within the capacity, and a penalty price when it does not. This crate
//! estimates per-hour consumption distributions from raw meter data and, for
//! each hour, computes the menu of tariff settings that make each candidate
//! capacity the user's strict best response, maximizing expected revenue and
//! then the over-consumption guarantee.
//!
//! Modules follow the pipeline:
//!
//! - [`consumption_data`]: meter CSV → hourly energies → discrete
//!   distributions.
//! - [`step_tariff`]: the price structure and its cost evaluations.
//! - [`best_response`]: the user's optimal booking over the finite candidate
//!   set, plus a brute-force oracle.
//! - [`lp_core`]: a small dense LP solver.
//! - [`price_setter`]: the per-candidate pricing models, the lexicographic
//!   two-stage solve, lazy constraint generation, δ sweeps and utopia
//!   reports.
//!
//! All numeric code is generic over the scalar ([`scalar::Real`]); the
//! aliases below pin the common `f64` instantiations.

pub mod best_response;
pub mod consumption_data;
pub mod instance_gen;
pub mod lp_core;
pub mod price_setter;
pub mod scalar;
pub mod step_tariff;
pub mod synthetic;

#[cfg(test)]
mod test_fixtures;

pub type StepFunction64 = step_tariff::StepFunction<f64>;
pub type TariffSetting64 = step_tariff::TariffSetting<f64>;
pub type DiscreteDistribution64 = consumption_data::DiscreteDistribution<f64>;
pub type CandidateSet64 = best_response::CandidateSet<f64>;
pub type LinearProgram64 = lp_core::LinearProgram<f64>;
pub type ContractRules64 = price_setter::ContractRules<f64>;
pub type SolverConfig64 = price_setter::SolverConfig<f64>;
pub type PricingOption64 = price_setter::PricingOption<f64>;
pub type Menu64 = price_setter::Menu<f64>;

pub type StepFunction32 = step_tariff::StepFunction<f32>;
pub type TariffSetting32 = step_tariff::TariffSetting<f32>;
pub type DiscreteDistribution32 = consumption_data::DiscreteDistribution<f32>;
