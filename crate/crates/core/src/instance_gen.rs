//! Deterministic random-instance generation for oracle verification: valid
//! tariff settings, consumption distributions and contract rule sets drawn
//! from a seeded generator, reproducible across platforms and runs.

use crate::consumption_data::DiscreteDistribution;
use crate::price_setter::{ContractRules, SolverConfig};
use crate::scalar::Real;
use crate::step_tariff::{StepFunction, TariffSetting};

/// SplitMix64: tiny, seedable, stable across platforms.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

/// Value ranges for generated instances. The defaults match the scale of
/// household data: loads of a few kWh, prices around 1.
#[derive(Debug, Clone)]
pub struct InstanceGen {
    pub scenarios: (usize, usize),
    pub steps: (usize, usize),
    pub load_range: (f64, f64),
    pub baseline_range: (f64, f64),
    pub booking_fee_range: (f64, f64),
}

impl Default for InstanceGen {
    fn default() -> Self {
        Self {
            scenarios: (3, 10),
            steps: (2, 5),
            load_range: (0.2, 6.0),
            baseline_range: (0.8, 1.2),
            booking_fee_range: (0.0, 0.4),
        }
    }
}

impl InstanceGen {
    pub fn distribution<T: Real>(&self, rng: &mut Rng, hour: u8) -> DiscreteDistribution<T> {
        let n = rng.int(self.scenarios.0, self.scenarios.1);
        let mut loads: Vec<f64> = (0..n)
            .map(|_| rng.range(self.load_range.0, self.load_range.1))
            .collect();
        loads.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for i in 1..loads.len() {
            if loads[i] - loads[i - 1] < 0.01 {
                loads[i] = loads[i - 1] + 0.01;
            }
        }
        let weights: Vec<f64> = (0..n).map(|_| rng.range(0.05, 1.0)).collect();
        let total: f64 = weights.iter().sum();
        DiscreteDistribution::new(
            hour,
            loads.into_iter().map(T::lit).collect(),
            weights.into_iter().map(|w| T::lit(w / total)).collect(),
        )
        .expect("generated distribution must be valid")
    }

    fn breakpoints(&self, rng: &mut Rng, steps: usize) -> Vec<f64> {
        let mut extra: Vec<f64> = (0..steps - 1).map(|_| rng.range(0.3, 5.5)).collect();
        extra.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut points = vec![0.0];
        for b in extra {
            let floor = points.last().unwrap() + 0.05;
            points.push(b.max(floor));
        }
        points
    }

    pub fn setting<T: Real>(&self, rng: &mut Rng) -> TariffSetting<T> {
        let baseline = rng.range(self.baseline_range.0, self.baseline_range.1);
        let n_lower = rng.int(self.steps.0, self.steps.1);
        let n_higher = rng.int(self.steps.0, self.steps.1);

        let lower_breaks = self.breakpoints(rng, n_lower);
        let mut lower_values = vec![baseline];
        for _ in 1..n_lower {
            let next = (lower_values.last().unwrap() - rng.range(0.02, 0.3)).max(0.05);
            lower_values.push(next);
        }
        let higher_breaks = self.breakpoints(rng, n_higher);
        let mut higher_values = vec![baseline];
        for _ in 1..n_higher {
            higher_values.push(higher_values.last().unwrap() + rng.range(0.02, 0.5));
        }

        let to_t = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
        TariffSetting::new(
            T::lit(rng.range(self.booking_fee_range.0, self.booking_fee_range.1)),
            T::lit(baseline),
            StepFunction::new(to_t(lower_breaks), to_t(lower_values)).unwrap(),
            StepFunction::new(to_t(higher_breaks), to_t(higher_values)).unwrap(),
        )
        .expect("generated setting must be valid")
    }

    pub fn instance<T: Real>(&self, rng: &mut Rng) -> (TariffSetting<T>, DiscreteDistribution<T>) {
        let setting = self.setting(rng);
        let hour = rng.int(0, 23) as u8;
        (setting, self.distribution(rng, hour))
    }

    /// Random contractual bounds wide enough to leave the solver room.
    pub fn rules<T: Real>(&self, rng: &mut Rng) -> ContractRules<T> {
        let k_min = rng.range(0.005, 0.05);
        let k_max = k_min + rng.range(0.1, 0.7);
        let dh_min = rng.range(0.01, 0.05);
        let dh_max = dh_min + rng.range(0.05, 0.5);
        let dl_min = rng.range(0.01, 0.05);
        let dl_max = dl_min + rng.range(0.05, 0.3);
        ContractRules::new(
            [T::lit(k_min), T::lit(k_max)],
            [T::lit(dh_min), T::lit(dh_max)],
            [T::lit(dl_min), T::lit(dl_max)],
            T::lit(0.01),
        )
        .expect("generated rules must be valid")
    }

    /// Random solver configuration with grids inside the load range.
    pub fn config<T: Real>(&self, rng: &mut Rng, delta: f64) -> SolverConfig<T> {
        let to_t = |v: Vec<f64>| v.into_iter().map(T::lit).collect::<Vec<T>>();
        let n_lower = rng.int(2, 4);
        let lower = self.breakpoints(rng, n_lower);
        let n_higher = rng.int(2, 4);
        let higher = self.breakpoints(rng, n_higher);
        SolverConfig::new(
            T::lit(delta),
            T::lit(rng.range(self.baseline_range.0, self.baseline_range.1)),
            to_t(lower),
            to_t(higher),
        )
        .expect("generated config must be valid")
    }
}
