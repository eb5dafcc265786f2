//! Dense bounded-variable primal simplex.
//!
//! Problems here are tiny (split-time subproblems, MILP relaxations of desk
//! scale instances), so a full tableau is kept. Variables carry `[lo, hi]`
//! bounds with `lo` finite and `hi` possibly [`INFINITY`]; nonbasic variables
//! sit at either bound. Phase one minimizes the sum of artificials; pricing is
//! Dantzig's rule, switching to Bland's rule while a streak of degenerate
//! pivots lasts. The tableau is rebuilt from the original columns every few
//! hundred pivots and at the end of each phase to keep rounding in check.

use crate::error::{Error, Result};

pub const INFINITY: f64 = f64::INFINITY;

const PIVOT_TOL: f64 = 1e-7;
const OPT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;
const DEGENERATE_STREAK: usize = 30;
const MAX_ITERATIONS: usize = 200_000;
const REFACTOR_EVERY: usize = 500;
const CONFIRM_AFTER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LpRow {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        LpRow {
            coeffs,
            relation,
            rhs,
        }
    }

    fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `min c·x` subject to rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    rows: Vec<LpRow>,
    bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, rows: Vec<LpRow>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let n = objective.len();
        if bounds.len() != n {
            return Err(Error::Dimension(format!(
                "{} bounds for {n} variables",
                bounds.len()
            )));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Dimension("objective coefficients must be finite".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} coefficients for {n} variables",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::Dimension(format!("row {i} carries a non-finite value")));
            }
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || hi.is_nan() || hi < lo || hi == f64::NEG_INFINITY {
                return Err(Error::Dimension(format!(
                    "variable {j} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(LpProblem {
            objective,
            rows,
            bounds,
        })
    }

    /// Nonnegative variables without upper bounds.
    pub fn nonnegative(objective: Vec<f64>, rows: Vec<LpRow>) -> Result<Self> {
        let n = objective.len();
        Self::new(objective, rows, vec![(0.0, INFINITY); n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn with_row(mut self, row: LpRow) -> Result<Self> {
        self.rows.push(row);
        Self::new(self.objective, self.rows, self.bounds)
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x));
        let bounds = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Row multipliers of the final basis (meaningful when optimal).
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Lagrangian bound `y·b + min_{lo ≤ x ≤ hi} (c − yA)·x` for multipliers `y`.
///
/// Multipliers with the wrong sign for their row are clamped to zero, so the
/// result is a valid lower bound on the optimum for any `y`.
pub fn dual_bound(p: &LpProblem, duals: &[f64]) -> f64 {
    let y: Vec<f64> = p
        .rows
        .iter()
        .zip(duals)
        .map(|(row, &y)| match row.relation {
            Relation::Ge => y.max(0.0),
            Relation::Le => y.min(0.0),
            Relation::Eq => y,
        })
        .collect();
    let mut bound: f64 = p.rows.iter().zip(&y).map(|(r, y)| y * r.rhs).sum();
    for (j, &(lo, hi)) in p.bounds.iter().enumerate() {
        let reduced = p.objective[j] - p.rows.iter().zip(&y).map(|(r, y)| y * r.coeffs[j]).sum::<f64>();
        bound += if reduced >= 0.0 {
            reduced * lo
        } else if hi.is_finite() {
            reduced * hi
        } else {
            f64::NEG_INFINITY
        };
    }
    bound
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Row-major `m x ncols`.
    a: Vec<f64>,
    /// Original scaled columns and right-hand side, for refactoring.
    a0: Vec<f64>,
    rhs0: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<ColState>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    /// Columns that may never enter the basis again.
    frozen: Vec<bool>,
    iterations: usize,
    bland: bool,
}

enum StepResult {
    Optimal,
    Unbounded,
    Continue,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.ncols + j]
    }

    fn recompute_reduced(&mut self) {
        for j in 0..self.ncols {
            let mut d = self.cost[j];
            for i in 0..self.m {
                d -= self.cost[self.basis[i]] * self.at(i, j);
            }
            self.reduced[j] = d;
        }
    }

    fn choose_entering(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncols {
            if self.frozen[j] {
                continue;
            }
            let d = self.reduced[j];
            let dir = match self.state[j] {
                ColState::AtLower if d < -OPT_TOL => 1.0,
                ColState::AtUpper if d > OPT_TOL => -1.0,
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(b, _)| d.abs() > self.reduced[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    fn step(&mut self, degenerate_streak: &mut usize) -> StepResult {
        let Some((enter, dir)) = self.choose_entering() else {
            return StepResult::Optimal;
        };
        // Harris ratio test: find the loosest step within tolerance, then take
        // the largest pivot among rows that block before it.
        let limits: Vec<Option<(f64, f64, f64)>> = (0..self.m)
            .map(|i| {
                let alpha = dir * self.at(i, enter);
                if alpha > PIVOT_TOL {
                    let dist = self.beta[i].max(0.0);
                    Some((dist / alpha, (dist + FEAS_TOL) / alpha, alpha))
                } else if alpha < -PIVOT_TOL && self.upper[self.basis[i]].is_finite() {
                    let dist = (self.upper[self.basis[i]] - self.beta[i]).max(0.0);
                    Some((dist / -alpha, (dist + FEAS_TOL) / -alpha, alpha))
                } else {
                    None
                }
            })
            .collect();
        let relaxed = limits
            .iter()
            .flatten()
            .map(|l| l.1)
            .fold(f64::INFINITY, f64::min);
        let mut theta = self.upper[enter];
        let mut leave: Option<(usize, f64)> = None;
        if relaxed < theta {
            let eligible = |l: &(f64, f64, f64)| l.0 <= relaxed;
            let biggest = limits
                .iter()
                .flatten()
                .filter(|l| eligible(l))
                .map(|l| l.2.abs())
                .fold(0.0, f64::max);
            let mut pick: Option<usize> = None;
            for (i, l) in limits.iter().enumerate() {
                let Some(l) = l.filter(eligible) else { continue };
                let better = match pick {
                    None => true,
                    Some(r) => {
                        let lr = limits[r].expect("picked row has a limit");
                        if self.bland {
                            // smallest index among well-conditioned candidates
                            (l.2.abs() >= 0.1 * biggest && lr.2.abs() < 0.1 * biggest)
                                || ((l.2.abs() >= 0.1 * biggest) == (lr.2.abs() >= 0.1 * biggest)
                                    && self.basis[i] < self.basis[r])
                        } else {
                            l.2.abs() > lr.2.abs()
                        }
                    }
                };
                if better {
                    pick = Some(i);
                }
            }
            let r = pick.expect("relaxed limit comes from some row");
            let l = limits[r].expect("picked row has a limit");
            theta = l.0;
            leave = Some((r, l.2));
        }
        if !theta.is_finite() {
            return StepResult::Unbounded;
        }
        if theta <= 1e-12 {
            *degenerate_streak += 1;
            if *degenerate_streak >= DEGENERATE_STREAK {
                self.bland = true;
            }
        } else {
            *degenerate_streak = 0;
            self.bland = false;
        }
        self.iterations += 1;

        for i in 0..self.m {
            let alpha = dir * self.at(i, enter);
            self.beta[i] -= theta * alpha;
        }
        let entering_value = match self.state[enter] {
            ColState::AtLower => theta,
            _ => self.upper[enter] - theta,
        };

        match leave {
            None => {
                // bound flip
                self.state[enter] = if dir > 0.0 {
                    ColState::AtUpper
                } else {
                    ColState::AtLower
                };
            }
            Some((r, alpha)) => {
                let old = self.basis[r];
                self.state[old] = if alpha > 0.0 {
                    ColState::AtLower
                } else {
                    ColState::AtUpper
                };
                self.pivot(r, enter);
                self.beta[r] = entering_value;
            }
        }
        for i in 0..self.m {
            let ub = self.upper[self.basis[i]];
            if self.beta[i] < 0.0 && self.beta[i] > -FEAS_TOL {
                self.beta[i] = 0.0;
            }
            if ub.is_finite() && self.beta[i] > ub && self.beta[i] < ub + FEAS_TOL {
                self.beta[i] = ub;
            }
        }
        StepResult::Continue
    }

    fn pivot(&mut self, r: usize, enter: usize) {
        let nc = self.ncols;
        let p = self.at(r, enter);
        for j in 0..nc {
            self.a[r * nc + j] /= p;
        }
        let pivot_row: Vec<f64> = self.a[r * nc..(r + 1) * nc].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * nc + enter];
            if f != 0.0 {
                for (j, pv) in pivot_row.iter().enumerate() {
                    if *pv != 0.0 {
                        self.a[i * nc + j] -= f * pv;
                    }
                }
                self.a[i * nc + enter] = 0.0;
            }
        }
        let f = self.reduced[enter];
        if f != 0.0 {
            for (j, pv) in pivot_row.iter().enumerate() {
                self.reduced[j] -= f * pv;
            }
            self.reduced[enter] = 0.0;
        }
        self.basis[r] = enter;
        self.state[enter] = ColState::Basic;
    }

    fn run(&mut self) -> StepResult {
        let mut streak = 0;
        let mut since_refactor = 0;
        loop {
            if self.iterations > MAX_ITERATIONS {
                panic!("simplex exceeded {MAX_ITERATIONS} iterations");
            }
            if since_refactor >= REFACTOR_EVERY {
                self.refactor();
                since_refactor = 0;
            }
            match self.step(&mut streak) {
                StepResult::Continue => since_refactor += 1,
                StepResult::Optimal if since_refactor >= CONFIRM_AFTER => {
                    // confirm optimality on a freshly rebuilt tableau
                    self.refactor();
                    since_refactor = 0;
                    if self.choose_entering().is_none() {
                        return StepResult::Optimal;
                    }
                }
                other => return other,
            }
        }
    }

    /// Rebuilds the tableau, basic values and reduced costs from the original
    /// columns for the current basis (Gauss-Jordan with partial pivoting).
    fn refactor(&mut self) {
        let (m, nc) = (self.m, self.ncols);
        let mut a = self.a0.clone();
        let mut b = self.rhs0.clone();
        for j in 0..nc {
            if self.state[j] == ColState::AtUpper {
                for (i, bi) in b.iter_mut().enumerate() {
                    *bi -= self.a0[i * nc + j] * self.upper[j];
                }
            }
        }
        let columns = self.basis.clone();
        let mut row_done = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &col in &columns {
            let pivot = (0..m)
                .filter(|&i| !row_done[i])
                .max_by(|&x, &y| a[x * nc + col].abs().total_cmp(&a[y * nc + col].abs()));
            let Some(r) = pivot.filter(|&r| a[r * nc + col].abs() > 1e-11) else {
                // numerically singular basis: keep the incremental tableau
                return;
            };
            row_done[r] = true;
            new_basis[r] = col;
            let p = a[r * nc + col];
            for j in 0..nc {
                a[r * nc + j] /= p;
            }
            b[r] /= p;
            let pivot_row: Vec<f64> = a[r * nc..(r + 1) * nc].to_vec();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = a[i * nc + col];
                if f != 0.0 {
                    for (j, pv) in pivot_row.iter().enumerate() {
                        if *pv != 0.0 {
                            a[i * nc + j] -= f * pv;
                        }
                    }
                    a[i * nc + col] = 0.0;
                    b[i] -= f * b[r];
                }
            }
        }
        for i in 0..m {
            let ub = self.upper[new_basis[i]];
            if b[i] < 0.0 && b[i] > -FEAS_TOL {
                b[i] = 0.0;
            }
            if ub.is_finite() && b[i] > ub && b[i] < ub + FEAS_TOL {
                b[i] = ub;
            }
        }
        self.a = a;
        self.beta = b;
        self.basis = new_basis;
        self.recompute_reduced();
    }

    fn column_value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::AtLower => 0.0,
            ColState::AtUpper => self.upper[j],
            ColState::Basic => {
                let r = self.basis.iter().position(|&b| b == j).expect("basic column");
                self.beta[r]
            }
        }
    }
}

/// Solves `p` to optimality, or reports infeasibility / unboundedness.
pub fn solve_lp(p: &LpProblem) -> LpOutcome {
    let n = p.num_vars();
    let m = p.rows.len();

    // shift every variable to [0, hi - lo]
    let shifted_upper: Vec<f64> = p.bounds.iter().map(|&(lo, hi)| hi - lo).collect();

    let slack_count = p.rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let mut row_scale = vec![1.0; m];
    let mut slack_col = vec![None; m];
    let mut art_col = vec![None; m];
    let mut next = n;
    for (i, row) in p.rows.iter().enumerate() {
        if row.relation != Relation::Eq {
            slack_col[i] = Some(next);
            next += 1;
        }
    }
    debug_assert_eq!(next, n + slack_count);

    // decide which rows need an artificial
    let mut rhs = vec![0.0; m];
    let mut needs_art = vec![false; m];
    for (i, row) in p.rows.iter().enumerate() {
        let shift: f64 = row
            .coeffs
            .iter()
            .zip(&p.bounds)
            .map(|(a, &(lo, _))| a * lo)
            .sum();
        let b = row.rhs - shift;
        let maxabs = row.coeffs.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
        let scale = if maxabs > 0.0 { 1.0 / maxabs } else { 1.0 };
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        row_scale[i] = sign * scale;
        rhs[i] = b * sign * scale;
        // slack coefficient after scaling: +1 for Le, -1 for Ge (times sign)
        let slack_positive = match row.relation {
            Relation::Le => sign > 0.0,
            Relation::Ge => sign < 0.0,
            Relation::Eq => false,
        };
        needs_art[i] = !slack_positive;
    }
    for i in 0..m {
        if needs_art[i] {
            art_col[i] = Some(next);
            next += 1;
        }
    }
    let ncols = next;

    let mut a = vec![0.0; m * ncols];
    let mut upper = vec![INFINITY; ncols];
    upper[..n].copy_from_slice(&shifted_upper);
    let mut basis = vec![0; m];
    let mut state = vec![ColState::AtLower; ncols];
    for (i, row) in p.rows.iter().enumerate() {
        let s = row_scale[i];
        for (j, &coef) in row.coeffs.iter().enumerate() {
            a[i * ncols + j] = coef * s;
        }
        if let Some(c) = slack_col[i] {
            // unit magnitude: the slack absorbs the row scale
            a[i * ncols + c] = slack_unit(row.relation, s);
        }
        if let Some(c) = art_col[i] {
            a[i * ncols + c] = 1.0;
            basis[i] = c;
        } else {
            basis[i] = slack_col[i].expect("row without artificial has a slack");
        }
        state[basis[i]] = ColState::Basic;
    }

    let mut t = Tableau {
        m,
        ncols,
        a0: a.clone(),
        rhs0: rhs.clone(),
        a,
        beta: rhs,
        basis,
        state,
        upper,
        cost: vec![0.0; ncols],
        reduced: vec![0.0; ncols],
        frozen: vec![false; ncols],
        iterations: 0,
        bland: false,
    };

    let art_cols: Vec<usize> = art_col.iter().flatten().copied().collect();
    if !art_cols.is_empty() {
        for &c in &art_cols {
            t.cost[c] = 1.0;
        }
        t.recompute_reduced();
        t.run();
        let infeas: f64 = art_cols.iter().map(|&c| t.column_value(c)).sum();
        if infeas > FEAS_TOL * (1.0 + m as f64) {
            return LpOutcome {
                status: LpStatus::Infeasible,
                values: vec![],
                objective: f64::NAN,
                duals: vec![],
                iterations: t.iterations,
            };
        }
        // drive artificials out of the basis where possible
        for r in 0..m {
            let b = t.basis[r];
            if !art_cols.contains(&b) {
                continue;
            }
            let candidate = (0..ncols)
                .filter(|j| !art_cols.contains(j) && t.state[*j] != ColState::Basic)
                .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()));
            if let Some(j) = candidate {
                if t.at(r, j).abs() > 1e-7 {
                    let value = t.column_value(j);
                    t.state[b] = ColState::AtLower;
                    t.pivot(r, j);
                    t.beta[r] = value;
                }
            }
        }
        for &c in &art_cols {
            t.frozen[c] = true;
            t.upper[c] = 0.0;
            t.cost[c] = 0.0;
        }
        t.bland = false;
    }

    t.cost[..n].copy_from_slice(&p.objective);
    t.recompute_reduced();
    let result = t.run();

    let values: Vec<f64> = (0..n)
        .map(|j| p.bounds[j].0 + t.column_value(j))
        .collect();
    if matches!(result, StepResult::Unbounded) {
        return LpOutcome {
            status: LpStatus::Unbounded,
            objective: f64::NEG_INFINITY,
            values,
            duals: vec![],
            iterations: t.iterations,
        };
    }

    // Column e_i (artificial, or slack with a +1 unit) prices the scaled row.
    let duals = (0..m)
        .map(|i| {
            let (col, unit) = match (art_col[i], slack_col[i]) {
                (Some(c), _) => (c, 1.0),
                (None, Some(c)) => (c, slack_unit(p.rows[i].relation, row_scale[i])),
                (None, None) => unreachable!(),
            };
            let pi = (t.cost[col] - t.reduced[col]) / unit;
            pi * row_scale[i]
        })
        .collect();

    LpOutcome {
        status: LpStatus::Optimal,
        objective: p.evaluate(&values),
        values,
        duals,
        iterations: t.iterations,
    }
}

/// Initial coefficient of a row's slack column after scaling the row by `scale`.
fn slack_unit(relation: Relation, scale: f64) -> f64 {
    let unit = if relation == Relation::Le { 1.0 } else { -1.0 };
    unit * scale.signum()
}
