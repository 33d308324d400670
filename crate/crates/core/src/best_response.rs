//! The user side of the game: the optimal booked capacity lies in the finite
//! set `{0} ∪ C^L ∪ Ω`, so the best response is an argmin over that set. A
//! dense-grid brute force is kept alongside as an independent oracle for the
//! enumeration claim.

use serde::Serialize;

use crate::consumption_data::DiscreteDistribution;
use crate::scalar::Real;
use crate::step_tariff::TariffSetting;

/// Where a candidate capacity came from. Merged duplicates keep the highest
/// priority origin, in the order below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CandidateOrigin {
    Zero,
    LowerBreakpoint,
    ScenarioLoad,
}

/// Sorted, deduplicated capacities that can be optimal for the user:
/// zero, the lower-curve breakpoints, and the scenario loads.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet<T> {
    capacities: Vec<T>,
    origins: Vec<CandidateOrigin>,
}

impl<T: Real> CandidateSet<T> {
    /// Union of `{0}`, the lower breakpoints and the scenario loads, sorted,
    /// with entries closer than the comparison tolerance merged.
    pub fn build(lower_breakpoints: &[T], dist: &DiscreteDistribution<T>) -> Self {
        let mut entries: Vec<(T, CandidateOrigin)> = Vec::new();
        entries.push((T::zero(), CandidateOrigin::Zero));
        entries.extend(
            lower_breakpoints.iter().map(|&b| (b, CandidateOrigin::LowerBreakpoint)),
        );
        entries.extend(dist.loads().iter().map(|&x| (x, CandidateOrigin::ScenarioLoad)));
        entries.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("candidate capacities must not be NaN")
                .then((a.1 as u8).cmp(&(b.1 as u8)))
        });

        let mut capacities: Vec<T> = Vec::with_capacity(entries.len());
        let mut origins: Vec<CandidateOrigin> = Vec::with_capacity(entries.len());
        for (value, origin) in entries {
            match capacities.last_mut() {
                Some(last) if (value - *last).abs() <= T::tol() => {
                    // Keep the larger representative so evaluation lands on
                    // the right-continuous side of a coinciding breakpoint.
                    if value > *last {
                        *last = value;
                    }
                }
                _ => {
                    capacities.push(value);
                    origins.push(origin);
                }
            }
        }
        Self { capacities, origins }
    }

    pub fn capacities(&self) -> &[T] {
        &self.capacities
    }

    pub fn origins(&self) -> &[CandidateOrigin] {
        &self.origins
    }

    pub fn len(&self) -> usize {
        self.capacities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacities.is_empty()
    }

    /// Index of the candidate matching `c` within tolerance.
    pub fn position_of(&self, c: T) -> Option<usize> {
        self.capacities.iter().position(|&s| (s - c).abs() <= T::tol())
    }
}

/// The user's optimal booking under a fixed tariff: the expected-cost argmin
/// over the candidate set, ties broken toward the smallest capacity.
/// Returns the capacity and its expected cost.
pub fn user_best_capacity<T: Real>(
    setting: &TariffSetting<T>,
    dist: &DiscreteDistribution<T>,
) -> (T, T) {
    let candidates = CandidateSet::build(setting.lower().breakpoints(), dist);
    let mut best_c = T::zero();
    let mut best_cost = T::infinity();
    for &c in candidates.capacities() {
        let cost = setting.expected_cost(c, dist);
        // Improvements inside the tolerance are ties, kept at the smaller
        // capacity; exact float ties would otherwise depend on summation
        // order.
        if cost < best_cost - T::tol() {
            best_cost = cost;
            best_c = c;
        }
    }
    (best_c, best_cost)
}

/// Smallest expected-cost gap between the chosen capacity and any other
/// candidate; `None` when the candidate set has no alternative.
pub fn margin<T: Real>(
    setting: &TariffSetting<T>,
    dist: &DiscreteDistribution<T>,
    chosen: T,
) -> Option<T> {
    let candidates = CandidateSet::build(setting.lower().breakpoints(), dist);
    let chosen_cost = setting.expected_cost(chosen, dist);
    candidates
        .capacities()
        .iter()
        .filter(|&&c| (c - chosen).abs() > T::tol())
        .map(|&c| setting.expected_cost(c, dist) - chosen_cost)
        .fold(None, |acc, gap| Some(acc.map_or(gap, |m: T| m.min(gap))))
}

/// Expected-cost argmin over a dense capacity grid, independent of the
/// candidate enumeration: multiples of `resolution` up to the largest load
/// plus the largest breakpoint, together with every event point and small
/// perturbations around each to expose right-continuity mistakes. Ties break
/// toward the smallest capacity.
pub fn brute_force_best<T: Real>(
    setting: &TariffSetting<T>,
    dist: &DiscreteDistribution<T>,
    resolution: T,
) -> T {
    assert!(resolution > T::zero(), "resolution must be positive");
    let max_load = dist.loads().last().copied().unwrap_or(T::zero());
    let max_break = setting
        .lower()
        .breakpoints()
        .iter()
        .chain(setting.higher().breakpoints())
        .copied()
        .fold(T::zero(), T::max);
    let limit = max_load + max_break;

    let mut grid: Vec<T> = Vec::new();
    let mut c = T::zero();
    while c <= limit {
        grid.push(c);
        c = c + resolution;
    }
    let nudge = resolution / T::lit(10.0);
    let events = setting
        .lower()
        .breakpoints()
        .iter()
        .chain(setting.higher().breakpoints())
        .chain(dist.loads())
        .copied();
    for e in events {
        grid.push(e);
        grid.push(e + nudge);
        if e - nudge >= T::zero() {
            grid.push(e - nudge);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("grid points must not be NaN"));
    grid.dedup();

    let mut best_c = T::zero();
    let mut best_cost = T::infinity();
    for &c in &grid {
        let cost = setting.expected_cost(c, dist);
        if cost < best_cost - T::tol() {
            best_cost = cost;
            best_c = c;
        }
    }
    best_c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance_gen::{InstanceGen, Rng};
    use crate::step_tariff::StepFunction;
    use crate::test_fixtures::{toy_dist, toy_setting};

    #[test]
    fn candidate_set_is_the_sorted_union() {
        let d = toy_dist();
        let s = CandidateSet::build(&[0.0, 2.0], &d);
        assert_eq!(s.capacities(), &[0.0, 1.0, 2.0, 2.5, 4.0]);
        assert_eq!(
            s.origins(),
            &[
                CandidateOrigin::Zero,
                CandidateOrigin::ScenarioLoad,
                CandidateOrigin::LowerBreakpoint,
                CandidateOrigin::ScenarioLoad,
                CandidateOrigin::ScenarioLoad,
            ]
        );
    }

    #[test]
    fn candidate_set_single_scenario() {
        let d = DiscreteDistribution::point_mass(0, 3.0).unwrap();
        let s = CandidateSet::build(&[0.0], &d);
        assert_eq!(s.capacities(), &[0.0, 3.0]);
    }

    #[test]
    fn candidate_set_merges_duplicates() {
        let d = DiscreteDistribution::new(0, vec![2.5, 4.0], vec![0.5, 0.5]).unwrap();
        let s = CandidateSet::build(&[0.0, 2.5], &d);
        assert_eq!(s.capacities(), &[0.0, 2.5, 4.0]);
        assert_eq!(s.origins()[1], CandidateOrigin::LowerBreakpoint);
    }

    #[test]
    fn flat_tariff_books_nothing() {
        let d = toy_dist();
        let flat = TariffSetting::time_of_use(1.0);
        let (c, cost) = user_best_capacity(&flat, &d);
        assert_eq!(c, 0.0);
        assert!((cost - 2.35).abs() < 1e-12);
        assert_eq!(brute_force_best(&flat, &d, 1e-3), 0.0);
    }

    #[test]
    fn toy_instance_books_the_top_load() {
        let (c, cost) = user_best_capacity(&toy_setting(), &toy_dist());
        assert_eq!(c, 4.0);
        assert!((cost - 2.28).abs() < 1e-12);
    }

    #[test]
    fn expensive_booking_fee_pushes_back_to_baseline() {
        let t = toy_setting();
        let steep = TariffSetting::new(
            0.5,
            t.baseline(),
            t.lower().clone(),
            t.higher().clone(),
        )
        .unwrap();
        let (c, cost) = user_best_capacity(&steep, &toy_dist());
        assert_eq!(c, 0.0);
        assert!((cost - 2.35).abs() < 1e-12);
    }

    #[test]
    fn brute_force_agrees_on_the_toy_instance() {
        let c = brute_force_best(&toy_setting(), &toy_dist(), 1e-3);
        assert_eq!(c, 4.0);
    }

    #[test]
    fn brute_force_lands_in_the_candidate_set() {
        let mut rng = Rng::new(0xBEEF);
        let gen = InstanceGen::default();
        for trial in 0..40 {
            let (setting, dist) = gen.instance::<f64>(&mut rng);
            let candidates = CandidateSet::build(setting.lower().breakpoints(), &dist);
            let brute = brute_force_best(&setting, &dist, 1e-3);
            assert!(
                candidates.position_of(brute).is_some(),
                "trial {trial}: brute-force argmin {brute} not a candidate"
            );
            let (_, enum_cost) = user_best_capacity(&setting, &dist);
            let brute_cost = setting.expected_cost(brute, &dist);
            assert!(
                (brute_cost - enum_cost).abs() <= 1e-9,
                "trial {trial}: cost gap {}",
                brute_cost - enum_cost
            );
        }
    }

    #[test]
    fn higher_breakpoints_are_never_optimal() {
        let mut rng = Rng::new(0xF00D);
        let gen = InstanceGen::default();
        for _ in 0..40 {
            let (setting, dist) = gen.instance::<f64>(&mut rng);
            let brute = brute_force_best(&setting, &dist, 1e-3);
            let candidates = CandidateSet::build(setting.lower().breakpoints(), &dist);
            for &h in setting.higher().breakpoints().iter().skip(1) {
                if candidates.position_of(h).is_none() {
                    assert!((brute - h).abs() > 1e-9, "argmin at higher breakpoint {h}");
                }
            }
        }
    }

    #[test]
    fn margin_measures_the_runner_up() {
        let t = toy_setting();
        let d = toy_dist();
        // Runner-up of capacity 4 is capacity 2.5: 2.29 - 2.28.
        let m = margin(&t, &d, 4.0).unwrap();
        assert!((m - 0.01).abs() < 1e-9);
        let single = DiscreteDistribution::point_mass(0, 0.0).unwrap();
        let flat = TariffSetting::new(
            0.0,
            1.0,
            StepFunction::flat(1.0),
            StepFunction::flat(1.0),
        )
        .unwrap();
        assert!(margin(&flat, &single, 0.0).is_none());
    }
}
