//! Dense bounded-variable primal simplex.
//!
//! Every row `a . x (rel) b` is given an activity variable `s = a . x` whose
//! bounds encode the relation, so the working system is `A x - s = 0` with
//! box bounds on every column. Nonbasic columns always sit at one of their
//! bounds. Entering and leaving choices follow Bland's rule, which rules out
//! cycling on degenerate vertices.
//!
//! Lexicographic optimization over a list of objectives is supported: after
//! each pass the nonbasic columns with non-zero reduced cost are pinned to
//! their current value, which restricts the next pass to the optimal face.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize constant + objective . x` subject to `constraints` and
/// `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constant: f64,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: vec![0.0; num_vars],
            constant: 0.0,
            constraints: Vec::new(),
            bounds: vec![(0.0, 0.0); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::invalid("bounds length differs from variable count"));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::invalid(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n || !c.rhs.is_finite() {
                return Err(Error::invalid(format!("constraint {i} is malformed")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("objective has a non-finite coefficient"));
        }
        Ok(())
    }

    /// Objective value of `x`, constant included.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.constant + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        for c in &self.constraints {
            let act: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let viol = match c.relation {
                Relation::Le => act - c.rhs,
                Relation::Ge => c.rhs - act,
                Relation::Eq => (act - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;

/// Solves `problem`, then lexicographically optimizes each of `tie_breaks`
/// (all minimized) over the optimal face of the previous objectives.
pub fn solve(problem: &LpProblem, tie_breaks: &[Vec<f64>]) -> Result<LpSolution> {
    problem.validate()?;
    let mut tab = Tableau::new(problem);
    tab.phase_one()?;

    let n = problem.num_vars();
    let mut iterations = tab.iterations;
    let mut objectives = Vec::with_capacity(1 + tie_breaks.len());
    objectives.push(problem.objective.clone());
    objectives.extend(tie_breaks.iter().cloned());
    for (k, obj) in objectives.iter().enumerate() {
        if obj.len() != n {
            return Err(Error::invalid("tie-break objective has the wrong length"));
        }
        let mut cost = vec![0.0; tab.cols];
        cost[..n].copy_from_slice(obj);
        tab.optimize(&cost)?;
        if k + 1 < objectives.len() {
            tab.restrict_to_optimal_face(&cost);
        }
    }
    iterations += tab.iterations;

    let x = tab.value[..n].to_vec();
    Ok(LpSolution {
        objective: problem.evaluate(&x),
        x,
        iterations,
    })
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `B^-1 A`, row-major.
    t: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    value: Vec<f64>,
    artificials: Vec<usize>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    fn new(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let m = p.constraints.len();

        let mut lower = Vec::with_capacity(n + 2 * m);
        let mut upper = Vec::with_capacity(n + 2 * m);
        let mut value = Vec::with_capacity(n + 2 * m);
        for &(lo, hi) in &p.bounds {
            lower.push(lo);
            upper.push(hi);
            value.push(lo);
        }
        for c in &p.constraints {
            let (lo, hi) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            lower.push(lo);
            upper.push(hi);
            value.push(0.0);
        }

        // Decide per row whether the activity column can start basic or an
        // artificial column is needed.
        let mut needs_art = Vec::with_capacity(m);
        for (i, c) in p.constraints.iter().enumerate() {
            let act: f64 = c.coeffs.iter().zip(&value[..n]).map(|(a, v)| a * v).sum();
            let s = n + i;
            if act >= lower[s] - FEAS_TOL && act <= upper[s] + FEAS_TOL {
                value[s] = act;
                needs_art.push(None);
            } else {
                let clamped = act.clamp(lower[s], upper[s]);
                value[s] = clamped;
                needs_art.push(Some((clamped - act).signum()));
            }
        }
        let num_art = needs_art.iter().filter(|a| a.is_some()).count();
        let cols = n + m + num_art;
        lower.resize(cols, 0.0);
        upper.resize(cols, f64::INFINITY);
        value.resize(cols, 0.0);

        let mut t = vec![0.0; m * cols];
        let mut basis = vec![0; m];
        let mut is_basic = vec![false; cols];
        let mut artificials = Vec::with_capacity(num_art);
        let mut next_art = n + m;
        for (i, c) in p.constraints.iter().enumerate() {
            let row = &mut t[i * cols..(i + 1) * cols];
            let s = n + i;
            match needs_art[i] {
                None => {
                    // s - a.x = 0
                    for (j, a) in c.coeffs.iter().enumerate() {
                        row[j] = -a;
                    }
                    row[s] = 1.0;
                    basis[i] = s;
                }
                Some(sigma) => {
                    // art + (a.x - s) / sigma = 0
                    for (j, a) in c.coeffs.iter().enumerate() {
                        row[j] = a / sigma;
                    }
                    row[s] = -1.0 / sigma;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    artificials.push(next_art);
                    next_art += 1;
                }
            }
            is_basic[basis[i]] = true;
        }

        let mut tab = Tableau {
            rows: m,
            cols,
            t,
            basis,
            is_basic,
            lower,
            upper,
            value,
            artificials,
            iterations: 0,
            max_iterations: 50_000 + 200 * (n + m),
        };
        tab.recompute_basic_values();
        tab
    }

    fn phase_one(&mut self) -> Result<()> {
        if self.artificials.is_empty() {
            return Ok(());
        }
        let mut cost = vec![0.0; self.cols];
        for &a in &self.artificials {
            cost[a] = 1.0;
        }
        self.optimize(&cost)?;
        let infeasibility: f64 = self.artificials.iter().map(|&a| self.value[a]).sum();
        let scale = 1.0 + self.value.iter().filter(|v| v.is_finite()).fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeasibility > 1e-7 * scale {
            return Err(Error::Solver(format!("problem is infeasible (residual {infeasibility:e})")));
        }
        for &a in &self.artificials.clone() {
            self.upper[a] = 0.0;
            if !self.is_basic[a] {
                self.value[a] = 0.0;
            }
        }
        self.recompute_basic_values();
        Ok(())
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.cols..(i + 1) * self.cols]
    }

    fn recompute_basic_values(&mut self) {
        for i in 0..self.rows {
            let b = self.basis[i];
            let row = self.row(i);
            let mut v = 0.0;
            for (j, &a) in row.iter().enumerate() {
                if j != b && a != 0.0 && !self.is_basic[j] {
                    v -= a * self.value[j];
                }
            }
            self.value[b] = v;
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, &a) in d.iter_mut().zip(self.row(i)) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        loop {
            if self.iterations >= self.max_iterations {
                return Err(Error::Solver("iteration limit reached".into()));
            }
            let d = self.reduced_costs(cost);

            // Bland: lowest-index improving column.
            let entering = (0..self.cols).find_map(|j| {
                if self.is_basic[j] || self.upper[j] - self.lower[j] <= 0.0 {
                    return None;
                }
                let at_lower = self.value[j] <= self.lower[j];
                let at_upper = self.value[j] >= self.upper[j];
                if d[j] < -OPT_TOL && !at_upper {
                    Some((j, 1.0))
                } else if d[j] > OPT_TOL && !at_lower {
                    Some((j, -1.0))
                } else {
                    None
                }
            });
            let Some((j, dir)) = entering else {
                return Ok(());
            };
            self.iterations += 1;

            // Ratio test.
            let mut theta = self.upper[j] - self.lower[j];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.t[i * self.cols + j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let rate = -a * dir;
                let (limit, bound) = if rate < 0.0 {
                    ((self.value[b] - self.lower[b]) / -rate, self.lower[b])
                } else {
                    ((self.upper[b] - self.value[b]) / rate, self.upper[b])
                };
                if !limit.is_finite() {
                    continue;
                }
                let limit = limit.max(0.0);
                let better = match leave {
                    None => limit < theta || (limit == theta && theta.is_finite()),
                    Some((r, _)) => limit < theta || (limit == theta && b < self.basis[r]),
                };
                if better {
                    theta = limit;
                    leave = Some((i, bound));
                }
            }
            if !theta.is_finite() {
                return Err(Error::Solver("objective is unbounded".into()));
            }

            match leave {
                None => {
                    // Bound flip.
                    self.value[j] = if dir > 0.0 { self.upper[j] } else { self.lower[j] };
                    self.recompute_basic_values();
                }
                Some((r, bound)) => {
                    let b = self.basis[r];
                    self.value[j] += dir * theta;
                    self.pivot(r, j);
                    self.value[b] = bound;
                    self.recompute_basic_values();
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + j];
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.row(r).to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let factor = self.t[i * cols + j];
            if factor == 0.0 {
                continue;
            }
            let row = &mut self.t[i * cols..(i + 1) * cols];
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                if pv != 0.0 {
                    *v -= factor * pv;
                }
            }
            row[j] = 0.0;
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }

    fn restrict_to_optimal_face(&mut self, cost: &[f64]) {
        let d = self.reduced_costs(cost);
        for j in 0..self.cols {
            if !self.is_basic[j] && d[j].abs() > OPT_TOL {
                self.lower[j] = self.value[j];
                self.upper[j] = self.value[j];
            }
        }
    }
}
