//! Dense two-phase primal simplex over unrestricted variables.
//!
//! Problems are stated as rows `a . x <= b`, `a . x >= b`, or `a . x = b`
//! over free variables. Internally each variable is split into a
//! difference of two nonnegative parts, slack columns turn inequalities
//! into equations, and artificial columns seed the initial basis where no
//! slack can. Phase one minimizes the artificial sum; a residual above
//! [`FEASIBILITY_TOL`] means the system is infeasible. Phase two prices
//! with Dantzig's rule and falls back to Bland's rule once degenerate
//! pivots persist, which guarantees termination.

/// Phase-one residual above which the constraint system is declared
/// infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Magnitude below which a tableau entry is treated as zero when
/// selecting pivots.
pub const PIVOT_TOL: f64 = 1e-9;

/// Consecutive degenerate pivots tolerated before switching from Dantzig
/// pricing to Bland's anti-cycling rule.
const DEGENERATE_PIVOT_LIMIT: usize = 5_000;

/// Hard cap on pivots. Unreachable once Bland's rule is active; kept as a
/// defense against numerically corrupted tableaus.
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: f64, point: Vec<f64> },
}

impl LpOutcome {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible)
    }

    /// The optimal value, if one was found.
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    /// The optimal point, if one was found.
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Le,
    Eq,
}

/// A linear constraint system over `num_vars` free variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> LinearProgram {
        assert!(num_vars > 0, "a linear program needs at least one variable");
        LinearProgram { num_vars, rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn check(&self, coeffs: &[f64]) {
        assert_eq!(coeffs.len(), self.num_vars, "coefficient arity mismatch");
        assert!(coeffs.iter().all(|c| c.is_finite()), "non-finite coefficient");
    }

    /// Add `coeffs . x <= rhs`.
    pub fn add_upper(&mut self, coeffs: &[f64], rhs: f64) {
        self.check(coeffs);
        self.rows.push((coeffs.to_vec(), Relation::Le, rhs));
    }

    /// Add `coeffs . x >= rhs`.
    pub fn add_lower(&mut self, coeffs: &[f64], rhs: f64) {
        self.check(coeffs);
        let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
        self.rows.push((negated, Relation::Le, -rhs));
    }

    /// Add `coeffs . x = rhs`.
    pub fn add_equality(&mut self, coeffs: &[f64], rhs: f64) {
        self.check(coeffs);
        self.rows.push((coeffs.to_vec(), Relation::Eq, rhs));
    }

    /// Constrain a single variable to `[lo, hi]`. Infinite endpoints are
    /// skipped.
    pub fn bound_var(&mut self, var: usize, lo: f64, hi: f64) {
        let mut unit = vec![0.0; self.num_vars];
        unit[var] = 1.0;
        if lo.is_finite() {
            self.add_lower(&unit, lo);
        }
        if hi.is_finite() {
            self.add_upper(&unit, hi);
        }
    }

    pub fn maximize(&self, objective: &[f64]) -> LpOutcome {
        self.check(objective);
        // Internally minimize the negated objective.
        let cost: Vec<f64> = objective.iter().map(|c| -c).collect();
        match Tableau::new(self).minimize(&cost) {
            LpOutcome::Optimal { point, .. } => {
                let value = dot(objective, &point);
                LpOutcome::Optimal { value, point }
            }
            other => other,
        }
    }

    pub fn minimize(&self, objective: &[f64]) -> LpOutcome {
        let negated: Vec<f64> = objective.iter().map(|c| -c).collect();
        match self.maximize(&negated) {
            LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
            other => other,
        }
    }

    /// Any point satisfying every row, found by optimizing a zero
    /// objective.
    pub fn feasible_point(&self) -> Option<Vec<f64>> {
        match self.maximize(&vec![0.0; self.num_vars]) {
            LpOutcome::Optimal { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full-tableau simplex state. Column layout: positive and negative parts
/// of each free variable (interleaved), then one slack per inequality
/// row, then artificials. The cost row carries reduced costs plus the
/// negated objective value in its last cell.
struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    num_vars: usize,
    // First artificial column; also the number of structural + slack
    // columns.
    art_start: usize,
    bland: bool,
    degenerate_streak: usize,
    pivots: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Tableau {
        let m = lp.rows.len();
        let n_split = 2 * lp.num_vars;
        let n_slack = lp.rows.iter().filter(|(_, rel, _)| *rel == Relation::Le).count();
        // One artificial per row at most; unused ones are never created.
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut needs_artificial = Vec::new();
        let mut slack_idx = 0;
        for (coeffs, rel, rhs) in &lp.rows {
            let mut row = vec![0.0; n_split + n_slack + 1];
            for (j, &c) in coeffs.iter().enumerate() {
                row[2 * j] = c;
                row[2 * j + 1] = -c;
            }
            let mut rhs = *rhs;
            let slack = match rel {
                Relation::Le => {
                    let col = n_split + slack_idx;
                    slack_idx += 1;
                    row[col] = 1.0;
                    Some(col)
                }
                Relation::Eq => None,
            };
            if rhs < 0.0 {
                for c in row.iter_mut() {
                    *c = -*c;
                }
                rhs = -rhs;
            }
            *row.last_mut().unwrap() = rhs;
            match slack {
                // A slack with coefficient +1 can start basic.
                Some(col) if row[col] > 0.0 => basis.push(col),
                _ => {
                    needs_artificial.push(rows.len());
                    basis.push(usize::MAX); // patched below
                }
            }
            rows.push(row);
        }
        let art_start = n_split + n_slack;
        let total = art_start + needs_artificial.len();
        for row in rows.iter_mut() {
            let rhs = row.pop().unwrap();
            row.resize(total, 0.0);
            row.push(rhs);
        }
        for (k, &i) in needs_artificial.iter().enumerate() {
            rows[i][art_start + k] = 1.0;
            basis[i] = art_start + k;
        }
        Tableau {
            rows,
            cost: vec![0.0; total + 1],
            basis,
            num_vars: lp.num_vars,
            art_start,
            bland: false,
            degenerate_streak: 0,
            pivots: 0,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        *self.rows[i].last().unwrap()
    }

    /// Install a cost vector and cancel the reduced costs of basic
    /// columns.
    fn set_cost(&mut self, column_costs: &[f64]) {
        let width = self.cost.len();
        self.cost
            .iter_mut()
            .zip(column_costs.iter().chain(std::iter::repeat(&0.0)))
            .for_each(|(slot, &c)| *slot = c);
        self.cost[width - 1] = 0.0;
        for i in 0..self.rows.len() {
            let c = self.cost[self.basis[i]];
            if c != 0.0 {
                for j in 0..width {
                    self.cost[j] -= c * self.rows[i][j];
                }
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = 1.0 / self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, p) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Run the simplex loop until the cost row is nonnegative over the
    /// first `usable` columns. Returns `false` on an unbounded ray.
    fn optimize(&mut self, usable: usize) -> bool {
        loop {
            assert!(self.pivots < MAX_PIVOTS, "pivot budget exhausted: corrupted tableau");
            if self.degenerate_streak > DEGENERATE_PIVOT_LIMIT {
                self.bland = true;
            }
            let entering = if self.bland {
                (0..usable).find(|&j| self.cost[j] < -PIVOT_TOL)
            } else {
                (0..usable)
                    .filter(|&j| self.cost[j] < -PIVOT_TOL)
                    .min_by(|&a, &b| self.cost[a].partial_cmp(&self.cost[b]).unwrap())
            };
            let Some(col) = entering else { return true };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let coef = self.rows[i][col];
                if coef <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i) / coef;
                let better = match leaving {
                    None => true,
                    Some((best_i, best)) => {
                        if self.bland && (ratio - best).abs() <= PIVOT_TOL {
                            self.basis[i] < self.basis[best_i]
                        } else {
                            ratio < best
                        }
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((row, ratio)) = leaving else { return false };
            if ratio.abs() <= PIVOT_TOL {
                self.degenerate_streak += 1;
            } else {
                self.degenerate_streak = 0;
            }
            self.pivot(row, col);
        }
    }

    fn minimize(&mut self, objective: &[f64]) -> LpOutcome {
        // Phase one: minimize the sum of artificials.
        if self.rows.iter().any(|r| r.len() - 1 > self.art_start) {
            let width = self.cost.len() - 1;
            let mut phase1 = vec![0.0; width];
            for slot in phase1.iter_mut().skip(self.art_start) {
                *slot = 1.0;
            }
            self.set_cost(&phase1);
            // A sum of nonnegative variables is bounded below.
            assert!(self.optimize(width), "artificial objective cannot be unbounded");
            let residual = -*self.cost.last().unwrap();
            if residual > FEASIBILITY_TOL {
                return LpOutcome::Infeasible;
            }
            self.purge_artificials();
        }
        // Phase two over structural and slack columns only.
        let mut phase2 = vec![0.0; self.art_start];
        for (j, &c) in objective.iter().enumerate() {
            phase2[2 * j] = c;
            phase2[2 * j + 1] = -c;
        }
        self.set_cost(&phase2);
        if !self.optimize(self.art_start) {
            return LpOutcome::Unbounded;
        }
        let point = self.extract_point();
        let value = dot(objective, &point);
        LpOutcome::Optimal { value, point }
    }

    /// Pivot basic artificials out of the basis; a row where none of the
    /// real columns can serve is redundant and is dropped.
    fn purge_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < self.art_start {
                i += 1;
                continue;
            }
            // The artificial sits at value ~0 here; any usable real column
            // lets it leave without changing the solution.
            match (0..self.art_start).find(|&j| self.rows[i][j].abs() > PIVOT_TOL) {
                Some(col) => {
                    *self.rows[i].last_mut().unwrap() = self.rhs(i).max(0.0);
                    self.pivot(i, col);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn extract_point(&self) -> Vec<f64> {
        let mut split = vec![0.0; self.art_start];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.art_start {
                split[b] = self.rhs(i);
            }
        }
        (0..self.num_vars).map(|j| split[2 * j] - split[2 * j + 1]).collect()
    }
}
