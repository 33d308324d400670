//! Minimal dense linear-programming layer: build small LPs over named,
//! optionally bounded variables and solve them to proven optimality with a
//! two-phase primal simplex. Bland's rule keeps pivoting deterministic and
//! cycle-free; instances here have a handful of variables and rows.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    InvalidProgram(String),
    #[error("solver failure: {0}")]
    Breakdown(String),
}

/// Handle to a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone)]
struct VarSpec<T> {
    name: String,
    lower: Option<T>,
    upper: Option<T>,
}

#[derive(Debug, Clone)]
struct Row<T> {
    terms: Vec<(usize, T)>,
    relation: Relation,
    rhs: T,
}

/// A linear program: named variables with optional bounds, linear
/// constraints, and one linear objective.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    vars: Vec<VarSpec<T>>,
    rows: Vec<Row<T>>,
    sense: Sense,
    objective: Vec<(usize, T)>,
    objective_constant: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver outcome. The assignment and objective value are only meaningful
/// when the status is [`LpStatus::Optimal`].
#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    assignment: Vec<T>,
    pub objective_value: T,
}

impl<T: Real> LpSolution<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Value of a variable in the optimal assignment.
    ///
    /// Panics when the status is not optimal.
    pub fn value(&self, var: VarId) -> T {
        assert!(self.is_optimal(), "no assignment for status {:?}", self.status);
        self.assignment[var.0]
    }

    fn non_optimal(status: LpStatus) -> Self {
        Self { status, assignment: Vec::new(), objective_value: T::nan() }
    }
}

impl<T: Real> LinearProgram<T> {
    pub fn new(sense: Sense) -> Self {
        Self {
            vars: Vec::new(),
            rows: Vec::new(),
            sense,
            objective: Vec::new(),
            objective_constant: T::zero(),
        }
    }

    /// Declare a variable with optional lower/upper bounds.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: Option<T>,
        upper: Option<T>,
    ) -> VarId {
        self.vars.push(VarSpec { name: name.into(), lower, upper });
        VarId(self.vars.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.vars[var.0].name
    }

    /// Add one objective term; repeated terms on a variable accumulate.
    pub fn add_objective_term(&mut self, var: VarId, coeff: T) -> Result<(), LpError> {
        self.check_term(var, coeff)?;
        self.objective.push((var.0, coeff));
        Ok(())
    }

    pub fn add_objective_constant(&mut self, value: T) {
        self.objective_constant = self.objective_constant + value;
    }

    pub fn add_constraint(
        &mut self,
        terms: &[(VarId, T)],
        relation: Relation,
        rhs: T,
    ) -> Result<(), LpError> {
        for &(var, coeff) in terms {
            self.check_term(var, coeff)?;
        }
        if !rhs.is_finite() {
            return Err(LpError::InvalidProgram("non-finite right-hand side".into()));
        }
        self.rows.push(Row {
            terms: terms.iter().map(|&(v, c)| (v.0, c)).collect(),
            relation,
            rhs,
        });
        Ok(())
    }

    fn check_term(&self, var: VarId, coeff: T) -> Result<(), LpError> {
        if var.0 >= self.vars.len() {
            return Err(LpError::InvalidProgram(format!(
                "term references undeclared variable #{}",
                var.0
            )));
        }
        if !coeff.is_finite() {
            return Err(LpError::InvalidProgram(format!(
                "non-finite coefficient on `{}`",
                self.vars[var.0].name
            )));
        }
        Ok(())
    }

    /// Debug dump in LP text format for external cross-checking.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n obj:",
            Sense::Minimize => "Minimize\n obj:",
        });
        for &(v, c) in &self.objective {
            out.push_str(&format!(" {:+} {}", c, self.vars[v].name));
        }
        out.push('\n');
        if self.objective_constant != T::zero() {
            out.push_str(&format!("\\ objective constant: {}\n", self.objective_constant));
        }
        out.push_str("Subject To\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&format!(" c{}:", i));
            for &(v, c) in &row.terms {
                out.push_str(&format!(" {:+} {}", c, self.vars[v].name));
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            out.push_str(&format!(" {} {}\n", rel, row.rhs));
        }
        out.push_str("Bounds\n");
        for v in &self.vars {
            match (v.lower, v.upper) {
                (Some(l), Some(u)) if l == u => out.push_str(&format!(" {} = {}\n", v.name, l)),
                (Some(l), Some(u)) => out.push_str(&format!(" {} <= {} <= {}\n", l, v.name, u)),
                (Some(l), None) => out.push_str(&format!(" {} >= {}\n", v.name, l)),
                (None, Some(u)) => out.push_str(&format!(" {} <= {}\n", v.name, u)),
                (None, None) => out.push_str(&format!(" {} free\n", v.name)),
            }
        }
        out.push_str("End\n");
        out
    }

    /// Solve to proven optimality.
    ///
    /// Infeasible and unbounded instances are reported through the solution
    /// status; numerical breakdown surfaces as an error distinct from both.
    pub fn solve(&self) -> Result<LpSolution<T>, LpError> {
        Tableau::build(self)?.solve(self)
    }

    fn evaluate_objective(&self, assignment: &[T]) -> T {
        let mut z = self.objective_constant;
        for &(v, c) in &self.objective {
            z = z + c * assignment[v];
        }
        z
    }

    fn max_violation(&self, assignment: &[T]) -> T {
        let mut worst = T::zero();
        for row in &self.rows {
            let lhs: T = row.terms.iter().map(|&(v, c)| c * assignment[v]).sum();
            let gap = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        for (spec, &x) in self.vars.iter().zip(assignment) {
            if let Some(l) = spec.lower {
                worst = worst.max(l - x);
            }
            if let Some(u) = spec.upper {
                worst = worst.max(x - u);
            }
        }
        worst
    }
}

/// How an original variable maps into the non-negative standard form.
#[derive(Debug, Clone, Copy)]
enum VarMap<T> {
    /// `x = offset + y`, `y >= 0`.
    Shifted { col: usize, offset: T },
    /// `x = offset - y`, `y >= 0` (upper bound only).
    Mirrored { col: usize, offset: T },
    /// `x = pos - neg`, both `>= 0` (free variable).
    Split { pos: usize, neg: usize },
    /// Pinned by equal bounds; not a column.
    Fixed { value: T },
}

struct Tableau<T> {
    /// `rows x (cols + 1)`; last entry of each row is the rhs.
    rows: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
    var_map: Vec<VarMap<T>>,
    infeasible_bounds: bool,
}

const MAX_PIVOTS: usize = 20_000;

impl<T: Real> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Result<Self, LpError> {
        let mut var_map = Vec::with_capacity(lp.vars.len());
        let mut cols = 0usize;
        let mut bound_rows: Vec<(usize, T)> = Vec::new(); // col <= limit
        let mut infeasible_bounds = false;

        for spec in &lp.vars {
            match (spec.lower, spec.upper) {
                (Some(l), Some(u)) if u < l => {
                    infeasible_bounds = true;
                    var_map.push(VarMap::Fixed { value: l });
                }
                (Some(l), Some(u)) if u == l => var_map.push(VarMap::Fixed { value: l }),
                (Some(l), upper) => {
                    let col = cols;
                    cols += 1;
                    if let Some(u) = upper {
                        bound_rows.push((col, u - l));
                    }
                    var_map.push(VarMap::Shifted { col, offset: l });
                }
                (None, Some(u)) => {
                    let col = cols;
                    cols += 1;
                    var_map.push(VarMap::Mirrored { col, offset: u });
                }
                (None, None) => {
                    let pos = cols;
                    let neg = cols + 1;
                    cols += 2;
                    var_map.push(VarMap::Split { pos, neg });
                }
            }
        }

        // Dense rows in the transformed space, as (coefficients, relation, rhs).
        let mut dense: Vec<(Vec<T>, Relation, T)> = Vec::new();
        for row in &lp.rows {
            let mut coeffs = vec![T::zero(); cols];
            let mut rhs = row.rhs;
            for &(v, c) in &row.terms {
                match var_map[v] {
                    VarMap::Shifted { col, offset } => {
                        coeffs[col] = coeffs[col] + c;
                        rhs = rhs - c * offset;
                    }
                    VarMap::Mirrored { col, offset } => {
                        coeffs[col] = coeffs[col] - c;
                        rhs = rhs - c * offset;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[pos] = coeffs[pos] + c;
                        coeffs[neg] = coeffs[neg] - c;
                    }
                    VarMap::Fixed { value } => rhs = rhs - c * value,
                }
            }
            dense.push((coeffs, row.relation, rhs));
        }
        for &(col, limit) in &bound_rows {
            let mut coeffs = vec![T::zero(); cols];
            coeffs[col] = T::one();
            dense.push((coeffs, Relation::Le, limit));
        }

        // Equalities with slack/surplus columns, rhs made non-negative.
        let m = dense.len();
        let total_cols = cols + m; // one slack/surplus or artificial slot per row
        let mut rows = Vec::with_capacity(m);
        let mut basis = vec![usize::MAX; m];
        for (i, (coeffs, relation, rhs)) in dense.into_iter().enumerate() {
            let mut row = vec![T::zero(); total_cols + 1];
            row[..cols].copy_from_slice(&coeffs);
            let slack_col = cols + i;
            match relation {
                Relation::Le => row[slack_col] = T::one(),
                Relation::Ge => row[slack_col] = -T::one(),
                Relation::Eq => {}
            }
            row[total_cols] = rhs;
            if rhs < T::zero() {
                for entry in row.iter_mut() {
                    *entry = -*entry;
                }
            }
            // A +1 slack with non-negative rhs starts in the basis.
            if row[slack_col] == T::one() {
                basis[i] = slack_col;
            }
            rows.push(row);
        }

        Ok(Self { rows, basis, cols: total_cols, var_map, infeasible_bounds })
    }

    fn rhs(&self, i: usize) -> T {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, pivot_row: usize, pivot_col: usize, reduced: &mut [T], z: &mut T) {
        let width = self.cols + 1;
        let factor = self.rows[pivot_row][pivot_col];
        for j in 0..width {
            self.rows[pivot_row][j] = self.rows[pivot_row][j] / factor;
        }
        for i in 0..self.rows.len() {
            if i == pivot_row {
                continue;
            }
            let scale = self.rows[i][pivot_col];
            if scale != T::zero() {
                for j in 0..width {
                    let delta = scale * self.rows[pivot_row][j];
                    self.rows[i][j] = self.rows[i][j] - delta;
                }
                self.rows[i][pivot_col] = T::zero();
            }
        }
        let scale = reduced[pivot_col];
        if scale != T::zero() {
            *z = *z + scale * self.rows[pivot_row][self.cols];
            for (r, &a) in reduced.iter_mut().zip(&self.rows[pivot_row]) {
                *r = *r - scale * a;
            }
            reduced[pivot_col] = T::zero();
        }
        self.basis[pivot_row] = pivot_col;
    }

    /// Maximize over the current tableau with Bland's rule. Returns false
    /// when unbounded.
    fn run_simplex(
        &mut self,
        reduced: &mut [T],
        z: &mut T,
        pivots: &mut usize,
    ) -> Result<bool, LpError> {
        let tol = T::tol();
        loop {
            let entering = (0..self.cols).find(|&j| reduced[j] > tol);
            let Some(col) = entering else {
                return Ok(true);
            };
            // Ratio test; ties resolved toward the smallest basis index.
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a > tol {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < best_ratio - tol
                                || (ratio <= best_ratio + tol
                                    && self.basis[i] < self.basis[best_row])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false);
            };
            self.pivot(row, col, reduced, z);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(LpError::Breakdown("pivot limit exceeded".into()));
            }
        }
    }

    fn solve(mut self, lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
        if self.infeasible_bounds {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        let tol = T::tol();
        let mut pivots = 0usize;

        // Phase 1: cover rows without an initial basic slack by artificial
        // columns and maximize minus their sum.
        let needs_artificial: Vec<usize> =
            (0..self.rows.len()).filter(|&i| self.basis[i] == usize::MAX).collect();
        if !needs_artificial.is_empty() {
            let art_start = self.cols;
            let art_count = needs_artificial.len();
            let width = art_start + art_count + 1;
            for row in self.rows.iter_mut() {
                let rhs = row.pop().unwrap();
                row.resize(width - 1, T::zero());
                row.push(rhs);
            }
            for (k, &i) in needs_artificial.iter().enumerate() {
                let col = art_start + k;
                self.rows[i][col] = T::one();
                self.basis[i] = col;
            }
            self.cols = art_start + art_count;

            // Reduced costs of max(-sum of artificials), canonicalized
            // against the artificial basis.
            let mut reduced = vec![T::zero(); self.cols];
            let mut z = T::zero();
            for &i in &needs_artificial {
                for (r, &a) in reduced.iter_mut().take(art_start).zip(&self.rows[i]) {
                    *r = *r + a;
                }
                z = z - self.rhs(i);
            }
            if !self.run_simplex(&mut reduced, &mut z, &mut pivots)? {
                return Err(LpError::Breakdown("phase 1 unbounded".into()));
            }
            if z < -T::lit(1e2) * tol {
                return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
            }
            // Remove artificials from the basis; rows that cannot be
            // re-based on a structural column are redundant.
            let mut drop_rows = Vec::new();
            for i in 0..self.rows.len() {
                if self.basis[i] >= art_start {
                    let col = (0..art_start).find(|&j| self.rows[i][j].abs() > tol);
                    match col {
                        Some(j) => {
                            let mut dummy = vec![T::zero(); self.cols];
                            let mut zero = T::zero();
                            self.pivot(i, j, &mut dummy, &mut zero);
                        }
                        None => drop_rows.push(i),
                    }
                }
            }
            for &i in drop_rows.iter().rev() {
                self.rows.remove(i);
                self.basis.remove(i);
            }
            for row in self.rows.iter_mut() {
                let rhs = row.remove(art_start + art_count);
                row.truncate(art_start);
                row.push(rhs);
            }
            self.cols = art_start;
        }

        // Phase 2: canonicalized reduced costs of the real objective.
        let sign = match lp.sense {
            Sense::Maximize => T::one(),
            Sense::Minimize => -T::one(),
        };
        let mut cost = vec![T::zero(); self.cols];
        for &(v, c) in &lp.objective {
            let c = c * sign;
            match self.var_map[v] {
                VarMap::Shifted { col, .. } => cost[col] = cost[col] + c,
                VarMap::Mirrored { col, .. } => cost[col] = cost[col] - c,
                VarMap::Split { pos, neg } => {
                    cost[pos] = cost[pos] + c;
                    cost[neg] = cost[neg] - c;
                }
                VarMap::Fixed { .. } => {}
            }
        }
        let mut reduced = cost.clone();
        let mut z = T::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != T::zero() {
                z = z + cb * self.rhs(i);
                for (r, &a) in reduced.iter_mut().zip(&self.rows[i]) {
                    *r = *r - cb * a;
                }
            }
        }
        for &b in &self.basis {
            reduced[b] = T::zero();
        }
        if !self.run_simplex(&mut reduced, &mut z, &mut pivots)? {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
        }

        // Recover the original variables.
        let mut transformed = vec![T::zero(); self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            let v = self.rhs(i);
            transformed[b] = if v.abs() <= tol { T::zero() } else { v };
        }
        let assignment: Vec<T> = self
            .var_map
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, offset } => offset + transformed[col],
                VarMap::Mirrored { col, offset } => offset - transformed[col],
                VarMap::Split { pos, neg } => transformed[pos] - transformed[neg],
                VarMap::Fixed { value } => value,
            })
            .collect();

        let objective_value = lp.evaluate_objective(&assignment);
        let violation = lp.max_violation(&assignment);
        if violation > T::lit(1e2) * tol {
            return Err(LpError::Breakdown(format!(
                "optimal basis violates constraints by {violation}"
            )));
        }
        Ok(LpSolution { status: LpStatus::Optimal, assignment, objective_value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9
    }

    #[test]
    fn single_variable_box() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(0.0), None);
        lp.add_objective_term(x, 1.0).unwrap();
        lp.add_constraint(&[(x, 1.0)], Relation::Le, 3.0).unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(approx(sol.value(x), 3.0));
        assert!(approx(sol.objective_value, 3.0));
    }

    #[test]
    fn two_variable_budget() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(0.0), None);
        let y = lp.add_var("y", Some(0.0), None);
        lp.add_objective_term(x, 1.0).unwrap();
        lp.add_objective_term(y, 1.0).unwrap();
        lp.add_constraint(&[(x, 1.0), (y, 1.0)], Relation::Le, 1.0).unwrap();
        let sol = lp.solve().unwrap();
        assert!(approx(sol.objective_value, 1.0));
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::<f64>::new(Sense::Minimize);
        let x = lp.add_var("x", Some(0.0), None);
        lp.add_constraint(&[(x, 1.0)], Relation::Le, -1.0).unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn inverted_bounds_are_infeasible() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(2.0), Some(1.0));
        lp.add_objective_term(x, 1.0).unwrap();
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn missing_ceiling_is_unbounded() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(0.0), None);
        lp.add_objective_term(x, 1.0).unwrap();
        lp.add_constraint(&[(x, 1.0)], Relation::Ge, 1.0).unwrap();
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_two_sided_bounds() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(0.0), Some(0.25));
        let y = lp.add_var("y", Some(0.0), None);
        lp.add_objective_term(x, 1.0).unwrap();
        lp.add_objective_term(y, 2.0).unwrap();
        lp.add_constraint(&[(x, 1.0), (y, 1.0)], Relation::Eq, 1.0).unwrap();
        let sol = lp.solve().unwrap();
        assert!(approx(sol.value(x), 0.0));
        assert!(approx(sol.value(y), 1.0));
        assert!(approx(sol.objective_value, 2.0));
    }

    #[test]
    fn free_variable_minimization() {
        let mut lp = LinearProgram::<f64>::new(Sense::Minimize);
        let x = lp.add_var("x", None, None);
        lp.add_objective_term(x, 1.0).unwrap();
        lp.add_constraint(&[(x, 1.0)], Relation::Ge, -3.0).unwrap();
        let sol = lp.solve().unwrap();
        assert!(approx(sol.value(x), -3.0));
        assert!(approx(sol.objective_value, -3.0));
    }

    #[test]
    fn upper_bounded_only_variable() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", None, Some(5.0));
        lp.add_objective_term(x, 1.0).unwrap();
        let sol = lp.solve().unwrap();
        assert!(approx(sol.value(x), 5.0));
    }

    #[test]
    fn fixed_variable_is_pinned_exactly() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(1.5), Some(1.5));
        let y = lp.add_var("y", Some(0.0), None);
        lp.add_objective_term(y, 1.0).unwrap();
        lp.add_constraint(&[(x, 1.0), (y, 1.0)], Relation::Le, 2.0).unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.value(x), 1.5);
        assert!(approx(sol.value(y), 0.5));
    }

    #[test]
    fn objective_constant_is_reported() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let _x = lp.add_var("x", Some(0.0), Some(1.0));
        lp.add_objective_constant(7.25);
        let sol = lp.solve().unwrap();
        assert!(approx(sol.objective_value, 7.25));
    }

    #[test]
    fn beale_cycle_terminates() {
        // Classic cycling instance; Bland's rule must terminate at 0.05.
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x1 = lp.add_var("x1", Some(0.0), None);
        let x2 = lp.add_var("x2", Some(0.0), None);
        let x3 = lp.add_var("x3", Some(0.0), None);
        let x4 = lp.add_var("x4", Some(0.0), None);
        lp.add_objective_term(x1, 0.75).unwrap();
        lp.add_objective_term(x2, -150.0).unwrap();
        lp.add_objective_term(x3, 0.02).unwrap();
        lp.add_objective_term(x4, -6.0).unwrap();
        lp.add_constraint(
            &[(x1, 0.25), (x2, -60.0), (x3, -0.04), (x4, 9.0)],
            Relation::Le,
            0.0,
        )
        .unwrap();
        lp.add_constraint(
            &[(x1, 0.5), (x2, -90.0), (x3, -0.02), (x4, 3.0)],
            Relation::Le,
            0.0,
        )
        .unwrap();
        lp.add_constraint(&[(x3, 1.0)], Relation::Le, 1.0).unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(approx(sol.objective_value, 0.05));
    }

    #[test]
    fn resolving_gives_identical_results() {
        let mut lp = LinearProgram::<f64>::new(Sense::Minimize);
        let x = lp.add_var("x", Some(0.0), None);
        let y = lp.add_var("y", Some(0.0), None);
        lp.add_objective_term(x, 2.0).unwrap();
        lp.add_objective_term(y, 3.0).unwrap();
        lp.add_constraint(&[(x, 1.0), (y, 2.0)], Relation::Ge, 4.0).unwrap();
        lp.add_constraint(&[(x, 3.0), (y, 1.0)], Relation::Ge, 6.0).unwrap();
        let a = lp.solve().unwrap();
        let b = lp.solve().unwrap();
        assert_eq!(a.value(x).to_bits(), b.value(x).to_bits());
        assert_eq!(a.value(y).to_bits(), b.value(y).to_bits());
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    }

    #[test]
    fn optimum_satisfies_constraints_tightly() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let vars: Vec<_> = (0..5)
            .map(|i| lp.add_var(format!("x{i}"), Some(0.0), Some(2.0 + i as f64)))
            .collect();
        for (i, &v) in vars.iter().enumerate() {
            lp.add_objective_term(v, 1.0 + 0.3 * i as f64).unwrap();
        }
        for i in 0..4 {
            lp.add_constraint(
                &[(vars[i], 1.0), (vars[i + 1], 0.7)],
                Relation::Le,
                2.5,
            )
            .unwrap();
        }
        lp.add_constraint(
            &vars.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(),
            Relation::Le,
            6.0,
        )
        .unwrap();
        let sol = lp.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let values: Vec<f64> = vars.iter().map(|&v| sol.value(v)).collect();
        assert!(values.iter().sum::<f64>() <= 6.0 + 1e-9);
        for i in 0..4 {
            assert!(values[i] + 0.7 * values[i + 1] <= 2.5 + 1e-9);
        }
    }

    #[test]
    fn rejects_undeclared_variables_and_bad_coefficients() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(0.0), None);
        let mut other = LinearProgram::<f64>::new(Sense::Maximize);
        for _ in 0..3 {
            other.add_var("y", Some(0.0), None);
        }
        let foreign = other.add_var("z", Some(0.0), None);
        assert!(lp.add_constraint(&[(foreign, 1.0)], Relation::Le, 1.0).is_err());
        assert!(lp.add_objective_term(x, f64::INFINITY).is_err());
        assert!(lp.add_constraint(&[(x, 1.0)], Relation::Le, f64::NAN).is_err());
    }

    #[test]
    fn lp_text_dump_mentions_all_sections() {
        let mut lp = LinearProgram::<f64>::new(Sense::Maximize);
        let x = lp.add_var("x", Some(0.0), Some(1.0));
        let y = lp.add_var("y", None, None);
        lp.add_objective_term(x, 2.0).unwrap();
        lp.add_constraint(&[(x, 1.0), (y, -1.0)], Relation::Ge, 0.5).unwrap();
        let text = lp.to_lp_text();
        assert!(text.contains("Maximize"));
        assert!(text.contains("Subject To"));
        assert!(text.contains(">= 0.5"));
        assert!(text.contains("Bounds"));
        assert!(text.contains("y free"));
        assert!(text.contains("End"));
    }
}
