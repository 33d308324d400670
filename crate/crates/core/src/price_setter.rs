//! The supplier side: for each candidate capacity, assemble the linear model
//! whose decision variables are the booking fee and the step values of both
//! price curves, enforce the user-optimality constraints over the candidate
//! set, and maximize expected revenue, then the over-consumption guarantee,
//! lexicographically.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::best_response::{self, CandidateSet};
use crate::consumption_data::DiscreteDistribution;
use crate::lp_core::{LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense, VarId};
use crate::scalar::Real;
use crate::step_tariff::{StepFunction, TariffSetting};

/// Inertia applied when none is configured explicitly.
pub const DEFAULT_DELTA: f64 = 0.05;

/// Relative stage-two revenue slack applied when none is configured.
pub const DEFAULT_LEX_SLACK: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum PriceSetterError {
    #[error("invalid contract rules: {0}")]
    InvalidRules(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("candidate index {index} out of range for {len} candidates")]
    CandidateOutOfRange { index: usize, len: usize },
    #[error("candidate {index} is infeasible")]
    InfeasibleCandidate { index: usize },
    #[error("lp solver failed on candidate {index}: {source}")]
    Solver {
        index: usize,
        #[source]
        source: LpError,
    },
    #[error("stage-two solve failed on candidate {index}: {reason}")]
    StageTwo { index: usize, reason: String },
    #[error("lazy loop exceeded {limit} iterations on candidate {index}")]
    LazyIterationCap { index: usize, limit: usize },
}

/// Contractual bounds on the pricing parameters: the booking fee window,
/// per-step increase bounds for the higher curve, per-step decrease bounds
/// for the lower curve, and a floor under every price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRules<T>")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct ContractRules<T> {
    booking_fee_bounds: [T; 2],
    higher_step_increase_bounds: [T; 2],
    lower_step_decrease_bounds: [T; 2],
    price_floor: T,
}

#[derive(Deserialize)]
struct RawRules<T> {
    booking_fee_bounds: [T; 2],
    higher_step_increase_bounds: [T; 2],
    lower_step_decrease_bounds: [T; 2],
    price_floor: T,
}

impl<T: Real> TryFrom<RawRules<T>> for ContractRules<T> {
    type Error = PriceSetterError;

    fn try_from(raw: RawRules<T>) -> Result<Self, PriceSetterError> {
        ContractRules::new(
            raw.booking_fee_bounds,
            raw.higher_step_increase_bounds,
            raw.lower_step_decrease_bounds,
            raw.price_floor,
        )
    }
}

impl<T: Real> ContractRules<T> {
    pub fn new(
        booking_fee_bounds: [T; 2],
        higher_step_increase_bounds: [T; 2],
        lower_step_decrease_bounds: [T; 2],
        price_floor: T,
    ) -> Result<Self, PriceSetterError> {
        let all = [
            booking_fee_bounds[0],
            booking_fee_bounds[1],
            higher_step_increase_bounds[0],
            higher_step_increase_bounds[1],
            lower_step_decrease_bounds[0],
            lower_step_decrease_bounds[1],
            price_floor,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(PriceSetterError::InvalidRules("bounds must be finite".into()));
        }
        for (name, pair) in [
            ("booking fee", booking_fee_bounds),
            ("higher step increase", higher_step_increase_bounds),
            ("lower step decrease", lower_step_decrease_bounds),
        ] {
            if pair[0] < T::zero() {
                return Err(PriceSetterError::InvalidRules(format!(
                    "{name} lower bound must be non-negative"
                )));
            }
            if pair[1] < pair[0] {
                return Err(PriceSetterError::InvalidRules(format!(
                    "{name} bounds must be ordered"
                )));
            }
        }
        if price_floor < T::zero() {
            return Err(PriceSetterError::InvalidRules(
                "price floor must be non-negative".into(),
            ));
        }
        Ok(Self {
            booking_fee_bounds,
            higher_step_increase_bounds,
            lower_step_decrease_bounds,
            price_floor,
        })
    }

    pub fn booking_fee_bounds(&self) -> [T; 2] {
        self.booking_fee_bounds
    }

    pub fn higher_step_increase_bounds(&self) -> [T; 2] {
        self.higher_step_increase_bounds
    }

    pub fn lower_step_decrease_bounds(&self) -> [T; 2] {
        self.lower_step_decrease_bounds
    }

    pub fn price_floor(&self) -> T {
        self.price_floor
    }

    /// Contractual bounds tuned for household-scale data normalized to a
    /// baseline of one currency unit per kWh. The equal decrease bounds pin
    /// the lower curve to regular price steps.
    pub fn household_defaults() -> Self {
        Self::new(
            [T::lit(0.01), T::lit(0.8)],
            [T::lit(0.05), T::lit(0.5)],
            [T::lit(0.15), T::lit(0.15)],
            T::lit(0.01),
        )
        .expect("default rules are valid")
    }
}

/// Solver knobs: user inertia, stage-two revenue slack, lazy constraint
/// generation, the baseline price and the fixed breakpoint grids the two
/// curves are optimized over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig<T>")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct SolverConfig<T> {
    delta: T,
    lexicographic_slack: T,
    lazy_mode: bool,
    baseline: T,
    lower_grid: Vec<T>,
    higher_grid: Vec<T>,
}

#[derive(Deserialize)]
struct RawConfig<T> {
    delta: T,
    lexicographic_slack: T,
    lazy_mode: bool,
    baseline: T,
    lower_grid: Vec<T>,
    higher_grid: Vec<T>,
}

impl<T: Real> TryFrom<RawConfig<T>> for SolverConfig<T> {
    type Error = PriceSetterError;

    fn try_from(raw: RawConfig<T>) -> Result<Self, PriceSetterError> {
        let cfg = SolverConfig::new(raw.delta, raw.baseline, raw.lower_grid, raw.higher_grid)?
            .with_lexicographic_slack(raw.lexicographic_slack)?;
        Ok(cfg.with_lazy_mode(raw.lazy_mode))
    }
}

fn check_grid<T: Real>(name: &str, grid: &[T]) -> Result<(), PriceSetterError> {
    if grid.is_empty() || grid[0] != T::zero() {
        return Err(PriceSetterError::InvalidConfig(format!(
            "{name} grid must start at 0"
        )));
    }
    if grid.iter().any(|b| !b.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PriceSetterError::InvalidConfig(format!(
            "{name} grid must be finite and strictly increasing"
        )));
    }
    Ok(())
}

impl<T: Real> SolverConfig<T> {
    pub fn new(
        delta: T,
        baseline: T,
        lower_grid: Vec<T>,
        higher_grid: Vec<T>,
    ) -> Result<Self, PriceSetterError> {
        if !delta.is_finite() || delta < T::zero() {
            return Err(PriceSetterError::InvalidConfig(
                "delta must be finite and non-negative".into(),
            ));
        }
        if !baseline.is_finite() || baseline <= T::zero() {
            return Err(PriceSetterError::InvalidConfig(
                "baseline price must be positive".into(),
            ));
        }
        check_grid("lower", &lower_grid)?;
        check_grid("higher", &higher_grid)?;
        Ok(Self {
            delta,
            lexicographic_slack: T::lit(DEFAULT_LEX_SLACK),
            lazy_mode: false,
            baseline,
            lower_grid,
            higher_grid,
        })
    }

    pub fn with_delta(mut self, delta: T) -> Result<Self, PriceSetterError> {
        if !delta.is_finite() || delta < T::zero() {
            return Err(PriceSetterError::InvalidConfig(
                "delta must be finite and non-negative".into(),
            ));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_lexicographic_slack(mut self, slack: T) -> Result<Self, PriceSetterError> {
        if !slack.is_finite() || slack < T::zero() {
            return Err(PriceSetterError::InvalidConfig(
                "lexicographic slack must be finite and non-negative".into(),
            ));
        }
        self.lexicographic_slack = slack;
        Ok(self)
    }

    pub fn with_lazy_mode(mut self, lazy: bool) -> Self {
        self.lazy_mode = lazy;
        self
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn lexicographic_slack(&self) -> T {
        self.lexicographic_slack
    }

    pub fn lazy_mode(&self) -> bool {
        self.lazy_mode
    }

    pub fn baseline(&self) -> T {
        self.baseline
    }

    pub fn lower_grid(&self) -> &[T] {
        &self.lower_grid
    }

    pub fn higher_grid(&self) -> &[T] {
        &self.higher_grid
    }

    /// Candidate capacities for a distribution under this grid.
    pub fn candidate_set(&self, dist: &DiscreteDistribution<T>) -> CandidateSet<T> {
        CandidateSet::build(&self.lower_grid, dist)
    }

    /// Solver settings matching [`ContractRules::household_defaults`]:
    /// δ = 0.05, baseline 1, grids covering loads from night troughs to
    /// evening peaks.
    pub fn household_defaults() -> Self {
        let lit = |v: &[f64]| v.iter().copied().map(T::lit).collect::<Vec<T>>();
        Self::new(
            T::lit(DEFAULT_DELTA),
            T::one(),
            lit(&[0.0, 0.15, 0.35, 0.9, 2.0, 3.5]),
            lit(&[0.0, 0.3, 0.8, 1.6, 2.8, 4.0]),
        )
        .expect("default config is valid")
    }
}

/// One menu entry: the targeted capacity, the tariff that makes it the
/// user's strict best response, and the resulting supplier objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct PricingOption<T> {
    pub time_frame: u8,
    pub target_capacity: T,
    pub setting: TariffSetting<T>,
    pub expected_revenue: T,
    pub guarantee: T,
    /// Smallest expected-cost advantage over any other candidate; `None`
    /// when the candidate set has no alternative.
    pub margin: Option<T>,
}

/// Feasibility outcome of one candidate solve.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateOutcome<T> {
    Feasible(Box<PricingOption<T>>),
    Infeasible,
}

impl<T> CandidateOutcome<T> {
    pub fn into_option(self) -> Option<PricingOption<T>> {
        match self {
            Self::Feasible(opt) => Some(*opt),
            Self::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MenuDiagnostics {
    pub candidates_total: usize,
    pub infeasible_count: usize,
    pub zero_option_present: bool,
}

/// All feasible pricing options for one time frame, sorted by capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct Menu<T> {
    pub time_frame: u8,
    pub options: Vec<PricingOption<T>>,
    pub diagnostics: MenuDiagnostics,
}

/// Which supplier objective a model maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelObjective {
    Revenue,
    Guarantee,
}

/// Extra rows appended to a candidate model; used by the lexicographic
/// second stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelConstraint<T> {
    RevenueAtLeast(T),
}

/// δ-sweep outcome: for each grid value, how many candidates with a nonzero
/// capacity remain feasible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSweep<T> {
    pub rows: Vec<(T, usize)>,
    /// Smallest grid δ with a count of zero, when reached.
    pub delta_max: Option<T>,
}

/// Comparison of the lexicographic point against each objective optimized
/// alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtopiaReport<T> {
    pub revenue_opt: T,
    pub guarantee_opt: T,
    pub lexicographic_revenue: T,
    pub lexicographic_guarantee: T,
    pub utopia_reached: bool,
    pub revenue_gap: T,
    pub guarantee_gap: T,
}

/// A candidate model with handles to its decision variables.
struct CandidateModel<T> {
    lp: LinearProgram<T>,
    fee: VarId,
    lower_vars: Vec<VarId>,
    higher_vars: Vec<VarId>,
}

struct Solver<'a, T> {
    dist: &'a DiscreteDistribution<T>,
    rules: &'a ContractRules<T>,
    cfg: &'a SolverConfig<T>,
    candidates: CandidateSet<T>,
    /// Per candidate: (step index in the lower grid, step index in the
    /// higher grid, mass below, mass above).
    profiles: Vec<(usize, usize, T, T)>,
}

impl<'a, T: Real> Solver<'a, T> {
    fn new(
        dist: &'a DiscreteDistribution<T>,
        rules: &'a ContractRules<T>,
        cfg: &'a SolverConfig<T>,
    ) -> Self {
        // Step index of a capacity on a validated breakpoint grid.
        let step = |grid: &[T], c: T| grid.partition_point(|&b| b <= c) - 1;
        let candidates = cfg.candidate_set(dist);
        let profiles = candidates
            .capacities()
            .iter()
            .map(|&c| {
                let (below, above) = dist.load_mass_split(c);
                (step(&cfg.lower_grid, c), step(&cfg.higher_grid, c), below, above)
            })
            .collect();
        Self { dist, rules, cfg, candidates, profiles }
    }

    fn check_index(&self, k: usize) -> Result<(), PriceSetterError> {
        if k >= self.candidates.len() {
            return Err(PriceSetterError::CandidateOutOfRange {
                index: k,
                len: self.candidates.len(),
            });
        }
        Ok(())
    }

    /// Linear expression of the expected cost at candidate `i`:
    /// `K*c + below*pi_l(step) + above*pi_h(step)`.
    fn cost_terms(&self, model: &CandidateModel<T>, i: usize) -> Vec<(VarId, T)> {
        let (lo_step, hi_step, below, above) = self.profiles[i];
        vec![
            (model.fee, self.candidates.capacities()[i]),
            (model.lower_vars[lo_step], below),
            (model.higher_vars[hi_step], above),
        ]
    }

    /// Difference `cost(k) - cost(l)` with coefficients on shared variables
    /// combined.
    fn cost_gap_terms(&self, model: &CandidateModel<T>, k: usize, l: usize) -> Vec<(VarId, T)> {
        let mut terms = self.cost_terms(model, k);
        for (var, coeff) in self.cost_terms(model, l) {
            match terms.iter_mut().find(|(v, _)| *v == var) {
                Some((_, c)) => *c = *c - coeff,
                None => terms.push((var, -coeff)),
            }
        }
        terms.retain(|&(_, c)| c != T::zero());
        terms
    }

    /// Assemble the model for candidate `k` with the given subset of
    /// user-optimality rows (`None` = all of them).
    fn build(
        &self,
        k: usize,
        objective: ModelObjective,
        extra: &[ModelConstraint<T>],
        included: Option<&[usize]>,
    ) -> Result<CandidateModel<T>, PriceSetterError> {
        self.check_index(k)?;
        let lift = |e: LpError| PriceSetterError::Solver { index: k, source: e };
        let baseline = self.cfg.baseline;
        let floor = self.rules.price_floor;
        let [k_min, k_max] = self.rules.booking_fee_bounds;

        let mut lp = LinearProgram::new(Sense::Maximize);
        let fee = lp.add_var("K", Some(k_min), Some(k_max));
        // Step values; both curves are anchored at the baseline, so the
        // first value of each is a fixed variable.
        let lower_vars: Vec<VarId> = (0..self.cfg.lower_grid.len())
            .map(|j| {
                if j == 0 {
                    lp.add_var("pi_l_0", Some(baseline), Some(baseline))
                } else {
                    lp.add_var(format!("pi_l_{j}"), Some(floor), None)
                }
            })
            .collect();
        let higher_vars: Vec<VarId> = (0..self.cfg.higher_grid.len())
            .map(|j| {
                if j == 0 {
                    lp.add_var("pi_h_0", Some(baseline), Some(baseline))
                } else {
                    lp.add_var(format!("pi_h_{j}"), Some(floor), None)
                }
            })
            .collect();

        // Contractual step bounds; monotonicity of both curves follows
        // because the minimum decrease/increase is non-negative.
        let [dl_min, dl_max] = self.rules.lower_step_decrease_bounds;
        for j in 1..lower_vars.len() {
            let step = [(lower_vars[j - 1], T::one()), (lower_vars[j], -T::one())];
            lp.add_constraint(&step, Relation::Ge, dl_min).map_err(lift)?;
            lp.add_constraint(&step, Relation::Le, dl_max).map_err(lift)?;
        }
        let [dh_min, dh_max] = self.rules.higher_step_increase_bounds;
        for j in 1..higher_vars.len() {
            let step = [(higher_vars[j], T::one()), (higher_vars[j - 1], -T::one())];
            lp.add_constraint(&step, Relation::Ge, dh_min).map_err(lift)?;
            lp.add_constraint(&step, Relation::Le, dh_max).map_err(lift)?;
        }

        let model = CandidateModel { lp, fee, lower_vars, higher_vars };
        let mut model = model;

        // User-optimality rows: cost(k) <= cost(l) - delta.
        let all: Vec<usize> = (0..self.candidates.len()).filter(|&l| l != k).collect();
        let rows = included.unwrap_or(&all);
        for &l in rows {
            let terms = self.cost_gap_terms(&model, k, l);
            model
                .lp
                .add_constraint(&terms, Relation::Le, -self.cfg.delta)
                .map_err(lift)?;
        }

        for constraint in extra {
            match constraint {
                ModelConstraint::RevenueAtLeast(threshold) => {
                    let terms = self.cost_terms(&model, k);
                    model
                        .lp
                        .add_constraint(&terms, Relation::Ge, *threshold)
                        .map_err(lift)?;
                }
            }
        }

        match objective {
            ModelObjective::Revenue => {
                for (var, coeff) in self.cost_terms(&model, k) {
                    model.lp.add_objective_term(var, coeff).map_err(lift)?;
                }
            }
            ModelObjective::Guarantee => {
                let c = self.candidates.capacities()[k];
                let (lo_step, hi_step, _, _) = self.profiles[k];
                model.lp.add_objective_term(model.higher_vars[hi_step], c).map_err(lift)?;
                model.lp.add_objective_term(model.lower_vars[lo_step], -c).map_err(lift)?;
            }
        }
        Ok(model)
    }

    fn setting_from(&self, model: &CandidateModel<T>, sol: &LpSolution<T>) -> TariffSetting<T> {
        let lower = StepFunction::new(
            self.cfg.lower_grid.clone(),
            model.lower_vars.iter().map(|&v| sol.value(v)).collect(),
        )
        .expect("solver output must form a step function");
        let higher = StepFunction::new(
            self.cfg.higher_grid.clone(),
            model.higher_vars.iter().map(|&v| sol.value(v)).collect(),
        )
        .expect("solver output must form a step function");
        TariffSetting::new(sol.value(model.fee), self.cfg.baseline, lower, higher)
            .expect("solver output must satisfy the tariff invariants")
    }

    fn solve_lp(&self, k: usize, lp: &LinearProgram<T>) -> Result<LpSolution<T>, PriceSetterError> {
        lp.solve().map_err(|e| PriceSetterError::Solver { index: k, source: e })
    }

    /// Slack granted on the stage-two revenue floor: relative for revenues
    /// of at least one currency unit, absolute near zero.
    fn stage_two_slack(&self, v: T) -> T {
        if v.abs() >= T::one() {
            v.abs() * self.cfg.lexicographic_slack
        } else {
            T::tol()
        }
    }

    fn stage_two_threshold(&self, v: T) -> T {
        v - self.stage_two_slack(v)
    }

    fn option_from(&self, k: usize, setting: TariffSetting<T>) -> PricingOption<T> {
        let c = self.candidates.capacities()[k];
        let expected_revenue = setting.expected_cost(c, self.dist);
        let guarantee = setting.guarantee(c);
        let margin = best_response::margin(&setting, self.dist, c);
        PricingOption {
            time_frame: self.dist.time_frame(),
            target_capacity: c,
            setting,
            expected_revenue,
            guarantee,
            margin,
        }
    }

    /// Lexicographic two-stage solve with all optimality rows present.
    fn solve_candidate(&self, k: usize) -> Result<CandidateOutcome<T>, PriceSetterError> {
        let stage1 = self.build(k, ModelObjective::Revenue, &[], None)?;
        let sol1 = self.solve_lp(k, &stage1.lp)?;
        match sol1.status {
            LpStatus::Infeasible => return Ok(CandidateOutcome::Infeasible),
            LpStatus::Unbounded => {
                return Err(PriceSetterError::Solver {
                    index: k,
                    source: LpError::Breakdown("revenue stage unbounded".into()),
                })
            }
            LpStatus::Optimal => {}
        }
        let v = sol1.objective_value;

        let stage2 = self.build(
            k,
            ModelObjective::Guarantee,
            &[ModelConstraint::RevenueAtLeast(self.stage_two_threshold(v))],
            None,
        )?;
        let sol2 = self.solve_lp(k, &stage2.lp)?;
        if sol2.status != LpStatus::Optimal {
            return Err(PriceSetterError::StageTwo {
                index: k,
                reason: format!("status {:?} with revenue floor {}", sol2.status, v),
            });
        }
        let setting = self.setting_from(&stage2, &sol2);
        Ok(CandidateOutcome::Feasible(Box::new(self.option_from(k, setting))))
    }

    /// Index of the most violated missing optimality row at the current
    /// prices, evaluated through the expected-cost oracle.
    fn most_violated(
        &self,
        k: usize,
        setting: &TariffSetting<T>,
        included: &[usize],
    ) -> Option<usize> {
        let c_k = self.candidates.capacities()[k];
        let cost_k = setting.expected_cost(c_k, self.dist);
        let mut worst: Option<(usize, T)> = None;
        for l in 0..self.candidates.len() {
            if l == k || included.contains(&l) {
                continue;
            }
            let c_l = self.candidates.capacities()[l];
            let violation = cost_k - (setting.expected_cost(c_l, self.dist) - self.cfg.delta);
            if violation > T::tol() {
                let beats = worst.is_none_or(|(_, w)| violation > w);
                if beats {
                    worst = Some((l, violation));
                }
            }
        }
        worst.map(|(l, _)| l)
    }

    /// Lazy variant: start with no optimality rows and add the most violated
    /// one until the solution satisfies them all.
    fn solve_candidate_lazy(
        &self,
        k: usize,
    ) -> Result<(CandidateOutcome<T>, LazyStats), PriceSetterError> {
        self.check_index(k)?;
        let limit = 10 * self.candidates.len().max(1);
        let mut included: Vec<usize> = Vec::new();
        let mut stats = LazyStats::default();

        let v = loop {
            stats.iterations += 1;
            if stats.iterations > limit {
                return Err(PriceSetterError::LazyIterationCap { index: k, limit });
            }
            let model = self.build(k, ModelObjective::Revenue, &[], Some(&included))?;
            let sol = self.solve_lp(k, &model.lp)?;
            match sol.status {
                // A relaxation is infeasible only if the full model is.
                LpStatus::Infeasible => {
                    stats.constraints_added = included.len();
                    return Ok((CandidateOutcome::Infeasible, stats));
                }
                LpStatus::Unbounded => {
                    return Err(PriceSetterError::Solver {
                        index: k,
                        source: LpError::Breakdown("relaxed revenue stage unbounded".into()),
                    })
                }
                LpStatus::Optimal => {}
            }
            let setting = self.setting_from(&model, &sol);
            match self.most_violated(k, &setting, &included) {
                Some(l) => included.push(l),
                None => break sol.objective_value,
            }
        };

        let threshold = self.stage_two_threshold(v);
        loop {
            stats.iterations += 1;
            if stats.iterations > limit {
                return Err(PriceSetterError::LazyIterationCap { index: k, limit });
            }
            let model = self.build(
                k,
                ModelObjective::Guarantee,
                &[ModelConstraint::RevenueAtLeast(threshold)],
                Some(&included),
            )?;
            let sol = self.solve_lp(k, &model.lp)?;
            if sol.status != LpStatus::Optimal {
                return Err(PriceSetterError::StageTwo {
                    index: k,
                    reason: format!("lazy status {:?} with revenue floor {}", sol.status, v),
                });
            }
            let setting = self.setting_from(&model, &sol);
            match self.most_violated(k, &setting, &included) {
                Some(l) => included.push(l),
                None => {
                    stats.constraints_added = included.len();
                    return Ok((
                        CandidateOutcome::Feasible(Box::new(self.option_from(k, setting))),
                        stats,
                    ));
                }
            }
        }
    }

    fn solve_dispatch(&self, k: usize) -> Result<CandidateOutcome<T>, PriceSetterError> {
        if self.cfg.lazy_mode {
            self.solve_candidate_lazy(k).map(|(outcome, _)| outcome)
        } else {
            self.solve_candidate(k)
        }
    }
}

/// Work counters of one lazy solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LazyStats {
    /// LP solves across both stages.
    pub iterations: usize,
    /// Distinct user-optimality rows added on the fly.
    pub constraints_added: usize,
}

/// Assemble the linear model for candidate `k`: decision variables are the
/// booking fee and the step values of both curves on the fixed grids; rows
/// are the anchor fixings, the contractual bounds, one user-optimality row
/// per other candidate, and any extra constraints.
pub fn build_lp<T: Real>(
    dist: &DiscreteDistribution<T>,
    k: usize,
    rules: &ContractRules<T>,
    cfg: &SolverConfig<T>,
    objective: ModelObjective,
    extra: &[ModelConstraint<T>],
) -> Result<LinearProgram<T>, PriceSetterError> {
    Solver::new(dist, rules, cfg)
        .build(k, objective, extra, None)
        .map(|m| m.lp)
}

/// Lexicographic solve of candidate `k`: maximize expected revenue, then the
/// guarantee subject to keeping the revenue within the configured slack.
pub fn solve_candidate<T: Real>(
    dist: &DiscreteDistribution<T>,
    k: usize,
    rules: &ContractRules<T>,
    cfg: &SolverConfig<T>,
) -> Result<CandidateOutcome<T>, PriceSetterError> {
    Solver::new(dist, rules, cfg).solve_candidate(k)
}

/// Same contract as [`solve_candidate`], adding the user-optimality rows on
/// the fly instead of all upfront.
pub fn solve_candidate_lazy<T: Real>(
    dist: &DiscreteDistribution<T>,
    k: usize,
    rules: &ContractRules<T>,
    cfg: &SolverConfig<T>,
) -> Result<CandidateOutcome<T>, PriceSetterError> {
    Solver::new(dist, rules, cfg).solve_candidate_lazy(k).map(|(outcome, _)| outcome)
}

/// [`solve_candidate_lazy`] with its work counters, for diagnostics.
pub fn solve_candidate_lazy_traced<T: Real>(
    dist: &DiscreteDistribution<T>,
    k: usize,
    rules: &ContractRules<T>,
    cfg: &SolverConfig<T>,
) -> Result<(CandidateOutcome<T>, LazyStats), PriceSetterError> {
    Solver::new(dist, rules, cfg).solve_candidate_lazy(k)
}

/// Solve every candidate and keep the feasible ones, sorted by capacity.
pub fn menu<T: Real>(
    dist: &DiscreteDistribution<T>,
    rules: &ContractRules<T>,
    cfg: &SolverConfig<T>,
) -> Result<Menu<T>, PriceSetterError> {
    let solver = Solver::new(dist, rules, cfg);
    let total = solver.candidates.len();
    let mut options = Vec::new();
    let mut infeasible = 0usize;
    for k in 0..total {
        match solver.solve_dispatch(k)? {
            CandidateOutcome::Feasible(opt) => options.push(*opt),
            CandidateOutcome::Infeasible => infeasible += 1,
        }
    }
    let zero_option_present = options
        .first()
        .map(|o| o.target_capacity == T::zero())
        .unwrap_or(false);
    Ok(Menu {
        time_frame: dist.time_frame(),
        options,
        diagnostics: MenuDiagnostics {
            candidates_total: total,
            infeasible_count: infeasible,
            zero_option_present,
        },
    })
}

/// For each δ in an increasing grid, count the feasible candidates with
/// nonzero capacity; reports the smallest δ whose count reaches zero.
pub fn delta_max<T: Real>(
    dist: &DiscreteDistribution<T>,
    rules: &ContractRules<T>,
    cfg: &SolverConfig<T>,
    delta_grid: &[T],
) -> Result<DeltaSweep<T>, PriceSetterError> {
    if delta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PriceSetterError::InvalidConfig(
            "delta grid must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(delta_grid.len());
    let mut reached = None;
    for &delta in delta_grid {
        let cfg_d = cfg.clone().with_delta(delta)?;
        let solver = Solver::new(dist, rules, &cfg_d);
        let mut count = 0usize;
        for k in 0..solver.candidates.len() {
            if solver.candidates.capacities()[k] == T::zero() {
                continue;
            }
            let model = solver.build(k, ModelObjective::Revenue, &[], None)?;
            let sol = solver.solve_lp(k, &model.lp)?;
            if sol.status == LpStatus::Optimal {
                count += 1;
            }
        }
        rows.push((delta, count));
        if count == 0 && reached.is_none() {
            reached = Some(delta);
        }
    }
    Ok(DeltaSweep { rows, delta_max: reached })
}

/// Solve each objective alone and compare the lexicographic point against
/// the resulting utopia point. Reachability is reported, never asserted.
pub fn utopia_check<T: Real>(
    dist: &DiscreteDistribution<T>,
    k: usize,
    rules: &ContractRules<T>,
    cfg: &SolverConfig<T>,
) -> Result<UtopiaReport<T>, PriceSetterError> {
    let solver = Solver::new(dist, rules, cfg);
    let revenue_alone = solver.build(k, ModelObjective::Revenue, &[], None)?;
    let revenue_sol = solver.solve_lp(k, &revenue_alone.lp)?;
    if revenue_sol.status != LpStatus::Optimal {
        return Err(PriceSetterError::InfeasibleCandidate { index: k });
    }
    let guarantee_alone = solver.build(k, ModelObjective::Guarantee, &[], None)?;
    let guarantee_sol = solver.solve_lp(k, &guarantee_alone.lp)?;
    if guarantee_sol.status != LpStatus::Optimal {
        return Err(PriceSetterError::InfeasibleCandidate { index: k });
    }
    let option = match solver.solve_candidate(k)? {
        CandidateOutcome::Feasible(opt) => *opt,
        CandidateOutcome::Infeasible => {
            return Err(PriceSetterError::InfeasibleCandidate { index: k })
        }
    };

    let revenue_opt = revenue_sol.objective_value;
    let guarantee_opt = guarantee_sol.objective_value;
    // The lexicographic revenue may legitimately rest anywhere above the
    // stage-two floor, so reachability is judged against that slack.
    let tol = |v: T| T::lit(2.0) * solver.stage_two_slack(v) + T::tol();
    let revenue_gap = revenue_opt - option.expected_revenue;
    let guarantee_gap = guarantee_opt - option.guarantee;
    Ok(UtopiaReport {
        revenue_opt,
        guarantee_opt,
        lexicographic_revenue: option.expected_revenue,
        lexicographic_guarantee: option.guarantee,
        utopia_reached: revenue_gap <= tol(revenue_opt) && guarantee_gap <= tol(guarantee_opt),
        revenue_gap,
        guarantee_gap,
    })
}
