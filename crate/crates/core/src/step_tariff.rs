//! Time-and-Level-of-Use price structure and cost evaluations for a fixed
//! tariff: a booking fee, a step-wise decreasing lower price curve applied
//! when consumption stays within the booked capacity, and a step-wise
//! increasing higher price curve applied when it does not.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consumption_data::DiscreteDistribution;
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TariffError {
    #[error("step function has {breakpoints} breakpoints but {values} values")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("step function must not be empty")]
    Empty,
    #[error("step function breakpoints must start at 0")]
    OriginMissing,
    #[error("step function breakpoints must be strictly increasing")]
    BreakpointsNotIncreasing,
    #[error("step function entries must be finite")]
    NonFinite,
    #[error("lower and higher curves must both start at the baseline price")]
    AnchorMismatch,
    #[error("lower tariff values must be non-increasing")]
    LowerNotDecreasing,
    #[error("higher tariff values must be non-decreasing")]
    HigherNotIncreasing,
    #[error("higher tariff must dominate the lower tariff at every capacity")]
    CurveCrossing,
    #[error("booking fee must be non-negative and finite")]
    InvalidBookingFee,
    #[error("negative {0} is outside the tariff domain")]
    NegativeInput(&'static str),
    #[error("relative cost is undefined at zero consumption")]
    ZeroConsumption,
}

/// Piecewise-constant price curve over capacity.
///
/// Evaluation is right-continuous: the value at capacity `c` is the value of
/// the step whose breakpoint is the largest one `<= c`. The last step extends
/// to +inf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepFunction<T>")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct StepFunction<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

#[derive(Deserialize)]
struct RawStepFunction<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> TryFrom<RawStepFunction<T>> for StepFunction<T> {
    type Error = TariffError;

    fn try_from(raw: RawStepFunction<T>) -> Result<Self, TariffError> {
        StepFunction::new(raw.breakpoints, raw.values)
    }
}

impl<T: Real> StepFunction<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>) -> Result<Self, TariffError> {
        if breakpoints.len() != values.len() {
            return Err(TariffError::LengthMismatch {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        if breakpoints.is_empty() {
            return Err(TariffError::Empty);
        }
        if breakpoints.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(TariffError::NonFinite);
        }
        if breakpoints[0] != T::zero() {
            return Err(TariffError::OriginMissing);
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TariffError::BreakpointsNotIncreasing);
        }
        Ok(Self { breakpoints, values })
    }

    /// Constant price over all capacities.
    pub fn flat(value: T) -> Self {
        Self { breakpoints: vec![T::zero()], values: vec![value] }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn step_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Index of the step containing capacity `c`: the largest `j` with
    /// `breakpoints[j] <= c`.
    pub fn step_index(&self, c: T) -> usize {
        debug_assert!(c >= T::zero());
        self.breakpoints.partition_point(|&b| b <= c) - 1
    }

    /// Right-continuous evaluation at capacity `c >= 0`.
    pub fn value_at(&self, c: T) -> T {
        self.values[self.step_index(c)]
    }
}

/// A full TLOU configuration: booking fee `K`, lower curve, higher curve and
/// the flat Time-of-Use baseline both curves are anchored to at capacity 0,
/// so that booking nothing reproduces the baseline tariff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTariffSetting<T>")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct TariffSetting<T> {
    booking_fee: T,
    baseline: T,
    lower: StepFunction<T>,
    higher: StepFunction<T>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
struct RawTariffSetting<T> {
    booking_fee: T,
    baseline: T,
    lower: StepFunction<T>,
    higher: StepFunction<T>,
}

impl<T: Real> TryFrom<RawTariffSetting<T>> for TariffSetting<T> {
    type Error = TariffError;

    fn try_from(raw: RawTariffSetting<T>) -> Result<Self, TariffError> {
        TariffSetting::new(raw.booking_fee, raw.baseline, raw.lower, raw.higher)
    }
}

impl<T: Real> TariffSetting<T> {
    pub fn new(
        booking_fee: T,
        baseline: T,
        lower: StepFunction<T>,
        higher: StepFunction<T>,
    ) -> Result<Self, TariffError> {
        if !(booking_fee.is_finite() && booking_fee >= T::zero()) {
            return Err(TariffError::InvalidBookingFee);
        }
        if !baseline.is_finite() {
            return Err(TariffError::NonFinite);
        }
        let tol = T::tol();
        if (lower.values[0] - baseline).abs() > tol || (higher.values[0] - baseline).abs() > tol {
            return Err(TariffError::AnchorMismatch);
        }
        if lower.values.windows(2).any(|w| w[1] > w[0] + tol) {
            return Err(TariffError::LowerNotDecreasing);
        }
        if higher.values.windows(2).any(|w| w[1] < w[0] - tol) {
            return Err(TariffError::HigherNotIncreasing);
        }
        // Implied by the monotonicities and the shared anchor; checked
        // directly at every breakpoint of either curve.
        for &c in lower.breakpoints.iter().chain(higher.breakpoints.iter()) {
            if higher.value_at(c) < lower.value_at(c) - tol {
                return Err(TariffError::CurveCrossing);
            }
        }
        Ok(Self { booking_fee, baseline, lower, higher })
    }

    /// Flat Time-of-Use tariff: no booking fee, both curves constant at the
    /// baseline price.
    pub fn time_of_use(baseline: T) -> Self {
        Self {
            booking_fee: T::zero(),
            baseline,
            lower: StepFunction::flat(baseline),
            higher: StepFunction::flat(baseline),
        }
    }

    pub fn booking_fee(&self) -> T {
        self.booking_fee
    }

    pub fn baseline(&self) -> T {
        self.baseline
    }

    pub fn lower(&self) -> &StepFunction<T> {
        &self.lower
    }

    pub fn higher(&self) -> &StepFunction<T> {
        &self.higher
    }

    /// Total cost of consuming `x` kWh with `c` kWh booked: the booking fee
    /// plus the energy bill, where consumption at or below the capacity is
    /// billed entirely at the lower price and consumption above it entirely
    /// at the higher price. The boundary `x = c` uses the lower price.
    pub fn cost(&self, c: T, x: T) -> Result<T, TariffError> {
        if c < T::zero() {
            return Err(TariffError::NegativeInput("capacity"));
        }
        if x < T::zero() {
            return Err(TariffError::NegativeInput("consumption"));
        }
        let price = if x <= c { self.lower.value_at(c) } else { self.higher.value_at(c) };
        Ok(self.booking_fee * c + price * x)
    }

    /// Cost per consumed kWh, `cost(c, x) / x`.
    pub fn relative_cost(&self, c: T, x: T) -> Result<T, TariffError> {
        if x == T::zero() {
            return Err(TariffError::ZeroConsumption);
        }
        Ok(self.cost(c, x)? / x)
    }

    /// Expected cost of booking `c` against the consumption distribution:
    /// `K*c + pi_l(c) * sum_below(x*p) + pi_h(c) * sum_above(x*p)`.
    pub fn expected_cost(&self, c: T, dist: &DiscreteDistribution<T>) -> T {
        assert!(c >= T::zero(), "capacity must be non-negative");
        let (below, above) = dist.load_mass_split(c);
        self.booking_fee * c + self.lower.value_at(c) * below + self.higher.value_at(c) * above
    }

    /// Over-consumption guarantee at capacity `c`: the immediate jump in
    /// total cost when consumption crosses the booked capacity,
    /// `c * (pi_h(c) - pi_l(c))`.
    pub fn guarantee(&self, c: T) -> T {
        assert!(c >= T::zero(), "capacity must be non-negative");
        c * (self.higher.value_at(c) - self.lower.value_at(c))
    }
}

/// Scenario indices split by a capacity: `below` holds every scenario with
/// load `x <= c`, `above` the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioPartition {
    pub below: Vec<usize>,
    pub above: Vec<usize>,
}

impl ScenarioPartition {
    pub fn split<T: Real>(dist: &DiscreteDistribution<T>, c: T) -> Self {
        assert!(c >= T::zero(), "capacity must be non-negative");
        let (mut below, mut above) = (Vec::new(), Vec::new());
        for (idx, &load) in dist.loads().iter().enumerate() {
            if load <= c {
                below.push(idx);
            } else {
                above.push(idx);
            }
        }
        Self { below, above }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::{toy_dist, toy_setting};

    #[test]
    fn step_function_is_right_continuous() {
        let f = StepFunction::new(vec![0.0, 2.0, 5.0], vec![1.0, 0.8, 0.5]).unwrap();
        assert_eq!(f.value_at(0.0), 1.0);
        assert_eq!(f.value_at(1.9999), 1.0);
        assert_eq!(f.value_at(2.0), 0.8);
        assert_eq!(f.value_at(4.0), 0.8);
        assert_eq!(f.value_at(5.0), 0.5);
        assert_eq!(f.value_at(1e6), 0.5);
    }

    #[test]
    fn step_function_rejects_bad_shapes() {
        assert_eq!(
            StepFunction::new(vec![0.0, 1.0], vec![1.0]),
            Err(TariffError::LengthMismatch { breakpoints: 2, values: 1 })
        );
        assert_eq!(
            StepFunction::<f64>::new(vec![], vec![]),
            Err(TariffError::Empty)
        );
        assert_eq!(
            StepFunction::new(vec![0.5, 1.0], vec![1.0, 0.9]),
            Err(TariffError::OriginMissing)
        );
        assert_eq!(
            StepFunction::new(vec![0.0, 2.0, 2.0], vec![1.0, 0.9, 0.8]),
            Err(TariffError::BreakpointsNotIncreasing)
        );
        assert_eq!(
            StepFunction::new(vec![0.0, f64::NAN], vec![1.0, 0.9]),
            Err(TariffError::NonFinite)
        );
    }

    #[test]
    fn setting_rejects_invariant_violations() {
        let lower = StepFunction::new(vec![0.0, 2.0], vec![1.0, 0.8]).unwrap();
        let higher = StepFunction::new(vec![0.0, 3.0], vec![1.0, 1.3]).unwrap();
        assert_eq!(
            TariffSetting::new(-0.1, 1.0, lower.clone(), higher.clone()),
            Err(TariffError::InvalidBookingFee)
        );
        assert_eq!(
            TariffSetting::new(0.1, 0.9, lower.clone(), higher.clone()),
            Err(TariffError::AnchorMismatch)
        );
        let rising_lower = StepFunction::new(vec![0.0, 2.0], vec![1.0, 1.1]).unwrap();
        assert_eq!(
            TariffSetting::new(0.1, 1.0, rising_lower, higher.clone()),
            Err(TariffError::LowerNotDecreasing)
        );
        let falling_higher = StepFunction::new(vec![0.0, 3.0], vec![1.0, 0.7]).unwrap();
        assert_eq!(
            TariffSetting::new(0.1, 1.0, lower, falling_higher),
            Err(TariffError::HigherNotIncreasing)
        );
    }

    #[test]
    fn cost_matches_hand_evaluations() {
        let t = toy_setting();
        // c=0 forces the baseline price.
        assert!((t.cost(0.0, 2.5).unwrap() - 2.5).abs() < 1e-12);
        // Within capacity: 0.1*2.5 + 0.8*2.5 = 2.25.
        assert!((t.cost(2.5, 2.5).unwrap() - 2.25).abs() < 1e-12);
        // Above capacity, higher curve still at baseline below breakpoint 3:
        // 0.25 + 1.0*4 = 4.25.
        assert!((t.cost(2.5, 4.0).unwrap() - 4.25).abs() < 1e-12);
    }

    #[test]
    fn cost_boundary_uses_lower_price() {
        let t = toy_setting();
        for c in [0.5, 2.0, 2.5, 3.0, 7.0] {
            let expected = t.booking_fee() * c + t.lower().value_at(c) * c;
            assert!((t.cost(c, c).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn cost_rejects_negative_domain() {
        let t = toy_setting();
        assert_eq!(t.cost(-1.0, 2.0), Err(TariffError::NegativeInput("capacity")));
        assert_eq!(t.cost(1.0, -2.0), Err(TariffError::NegativeInput("consumption")));
    }

    #[test]
    fn partition_splits_on_boundary() {
        let d = toy_dist();
        let all = ScenarioPartition::split(&d, 0.0);
        assert_eq!(all.below, Vec::<usize>::new());
        assert_eq!(all.above, vec![0, 1, 2]);

        let mid = ScenarioPartition::split(&d, 2.5);
        assert_eq!(mid.below, vec![0, 1]);
        assert_eq!(mid.above, vec![2]);

        let top = ScenarioPartition::split(&d, 10.0);
        assert_eq!(top.below, vec![0, 1, 2]);
        assert_eq!(top.above, Vec::<usize>::new());
    }

    #[test]
    fn expected_cost_matches_hand_evaluations() {
        let t = toy_setting();
        let d = toy_dist();
        // c=0: baseline times the mean, 1.0 * 2.35.
        assert!((t.expected_cost(0.0, &d) - 2.35).abs() < 1e-12);
        // 0.25 + 0.8*(0.3 + 1.25) + 1.0*0.8 = 2.29.
        assert!((t.expected_cost(2.5, &d) - 2.29).abs() < 1e-12);
        // All scenarios below: 0.4 + 0.8*2.35 = 2.28.
        assert!((t.expected_cost(4.0, &d) - 2.28).abs() < 1e-12);
    }

    #[test]
    fn relative_cost_matches_hand_evaluations() {
        let t = toy_setting();
        for x in [0.1, 1.0, 3.7] {
            assert!((t.relative_cost(0.0, x).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((t.relative_cost(2.5, 2.5).unwrap() - 0.9).abs() < 1e-12);
        assert!((t.relative_cost(2.5, 4.0).unwrap() - 1.0625).abs() < 1e-12);
        assert_eq!(t.relative_cost(2.5, 0.0), Err(TariffError::ZeroConsumption));
    }

    #[test]
    fn guarantee_matches_hand_evaluations() {
        let t = toy_setting();
        assert_eq!(t.guarantee(0.0), 0.0);
        assert!((t.guarantee(2.5) - 0.5).abs() < 1e-12);
        // Higher curve steps up exactly at 3 under right-continuity.
        assert!((t.guarantee(3.0) - 1.5).abs() < 1e-12);
        for c in [0.0, 0.7, 2.0, 2.5, 3.0, 9.0] {
            assert!(t.guarantee(c) >= 0.0);
        }
    }

    /// Every capacity at which the expected cost can change slope or jump:
    /// breakpoints of both curves and the scenario loads.
    fn event_points(t: &TariffSetting<f64>, d: &DiscreteDistribution<f64>) -> Vec<f64> {
        let mut events: Vec<f64> = t
            .lower()
            .breakpoints()
            .iter()
            .chain(t.higher().breakpoints())
            .chain(d.loads())
            .copied()
            .collect();
        events.sort_by(|a, b| a.partial_cmp(b).unwrap());
        events.dedup();
        events
    }

    #[test]
    fn expected_cost_is_linear_between_events() {
        let mut rng = crate::instance_gen::Rng::new(41);
        let gen = crate::instance_gen::InstanceGen::default();
        let mut checked = 0;
        for _ in 0..30 {
            let (t, d) = gen.instance::<f64>(&mut rng);
            let events = event_points(&t, &d);
            for w in events.windows(2) {
                let gap = w[1] - w[0];
                if gap < 1e-6 {
                    continue;
                }
                let c1 = w[0] + 0.25 * gap;
                let c2 = w[0] + 0.75 * gap;
                let diff = t.expected_cost(c2, &d) - t.expected_cost(c1, &d);
                let slope_term = t.booking_fee() * (c2 - c1);
                assert!(
                    (diff - slope_term).abs() <= 1e-9,
                    "non-linear between {} and {}: {diff} vs {slope_term}",
                    w[0],
                    w[1]
                );
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn higher_breakpoint_jumps_match_the_partition_formula() {
        let mut rng = crate::instance_gen::Rng::new(42);
        let gen = crate::instance_gen::InstanceGen::default();
        let mut positive_jumps = 0;
        for _ in 0..40 {
            let (t, d) = gen.instance::<f64>(&mut rng);
            let events = event_points(&t, &d);
            for &cbar in t.higher().breakpoints().iter().skip(1) {
                // Only breakpoints isolated from every other event qualify.
                let nearest = events
                    .iter()
                    .filter(|&&e| (e - cbar).abs() > 1e-12)
                    .map(|&e| (e - cbar).abs())
                    .fold(f64::INFINITY, f64::min);
                if nearest < 1e-5 {
                    continue;
                }
                let eps = (nearest / 2.0).min(1e-4);
                let jump = t.expected_cost(cbar + eps, &d) - t.expected_cost(cbar - eps, &d);
                let step = t.higher().value_at(cbar + eps) - t.higher().value_at(cbar - eps);
                let above: f64 = d
                    .loads()
                    .iter()
                    .zip(d.probs())
                    .filter(|(&x, _)| x > cbar)
                    .map(|(&x, &p)| x * p)
                    .sum();
                let expected = 2.0 * eps * t.booking_fee() + step * above;
                assert!(
                    (jump - expected).abs() <= 1e-9,
                    "jump {jump} vs formula {expected} at {cbar}"
                );
                if above > 0.0 {
                    assert!(jump > 0.0, "non-positive jump at {cbar}");
                    positive_jumps += 1;
                }
            }
        }
        assert!(positive_jumps > 20);
    }

    #[test]
    fn serde_round_trip_is_lossless() {
        let t = TariffSetting::new(
            0.1 + 1e-13,
            1.0 / 3.0,
            StepFunction::new(vec![0.0, 2.0 / 7.0], vec![1.0 / 3.0, 0.1234567890123456]).unwrap(),
            StepFunction::new(vec![0.0, 3.1], vec![1.0 / 3.0, 1.3]).unwrap(),
        )
        .unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: TariffSetting<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn serde_rejects_invalid_setting() {
        let json = r#"{
            "booking_fee": -0.5,
            "baseline": 1.0,
            "lower": {"breakpoints": [0.0], "values": [1.0]},
            "higher": {"breakpoints": [0.0], "values": [1.0]}
        }"#;
        assert!(serde_json::from_str::<TariffSetting<f64>>(json).is_err());
    }
}
