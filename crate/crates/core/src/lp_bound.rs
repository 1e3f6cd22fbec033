//! Fractional lower bound for a fixed link capacity `M`.
//!
//! `y_i in [0, x_i]` is the accepted amount of packet `i`; `S_L`/`S_R` are the
//! end capacities after each step. The LP minimizes
//! `sum_i f (x_i - y_i) + m (x_i - y_i) / x_i`.
//!
//! Two equivalent encodings are built. The full form keeps every trace
//! variable; the reduced form eliminates them through
//! `S_L,i = S_L,0 - P_i(y)` with `P_i` the signed prefix sum of `y`, leaving
//! `t + 1` columns. The reduced form is the one solved in production.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, TAU};
use crate::simplex;

pub use crate::simplex::{Constraint, LpProblem, Relation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub capacity: f64,
    pub y: Vec<f64>,
    pub left_trace: Vec<f64>,
    pub right_trace: Vec<f64>,
    pub objective: f64,
}

impl FractionalSolution {
    /// Accepted fraction `y_i / x_i` for each packet.
    pub fn fractions(&self, instance: &Instance) -> Vec<f64> {
        self.y.iter().zip(instance.weights()).map(|(y, x)| y / x).collect()
    }
}

/// Result of dropping packets that cannot fit a link of capacity `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub sub_instance: Instance,
    pub forced_cost: f64,
    /// `kept[k]` is the 0-based original position of sub-instance packet `k`.
    pub kept: Vec<usize>,
}

impl Preprocessed {
    /// Whether original position `pos` survived preprocessing.
    pub fn is_kept(&self, pos: usize) -> bool {
        self.kept.binary_search(&pos).is_ok()
    }
}

/// Removes packets heavier than `M` (beyond `TAU`); any solution with
/// capacity `M` must reject them.
pub fn preprocess_oversized(instance: &Instance, capacity: f64) -> Preprocessed {
    let mut kept = Vec::new();
    let mut forced_cost = 0.0;
    for (k, p) in instance.packets().iter().enumerate() {
        if p.weight > capacity + TAU {
            forced_cost += instance.rejection_cost(p);
        } else {
            kept.push(k);
        }
    }
    Preprocessed {
        sub_instance: instance.select(&kept),
        forced_cost,
        kept,
    }
}

pub(crate) fn check_fits(instance: &Instance, capacity: f64) -> Result<()> {
    if !(capacity.is_finite() && capacity >= 0.0) {
        return Err(Error::invalid(format!("capacity must be non-negative, got {capacity}")));
    }
    if let Some(p) = instance.packets().iter().find(|p| p.weight > capacity + TAU) {
        return Err(Error::invalid(format!(
            "packet {} of weight {} exceeds capacity {capacity}; preprocess first",
            p.index, p.weight
        )));
    }
    Ok(())
}

pub(crate) fn set_objective(lp: &mut LpProblem, instance: &Instance, y_col: impl Fn(usize) -> usize) {
    let (f, m) = (instance.f(), instance.m());
    for (i, p) in instance.packets().iter().enumerate() {
        lp.objective[y_col(i)] = -(f + m / p.weight);
        lp.constant += f * p.weight + m;
    }
}

/// Column layout of the full form: `y_1..y_t`, `S_L,0..S_L,t`, `S_R,0..S_R,t`.
pub struct FullLayout {
    pub t: usize,
}

impl FullLayout {
    pub fn y(&self, i: usize) -> usize {
        i
    }
    pub fn left(&self, i: usize) -> usize {
        self.t + i
    }
    pub fn right(&self, i: usize) -> usize {
        2 * self.t + 1 + i
    }
    pub fn num_vars(&self) -> usize {
        3 * self.t + 2
    }
}

pub fn build_full_lp(instance: &Instance, capacity: f64) -> Result<LpProblem> {
    check_fits(instance, capacity)?;
    let t = instance.len();
    let lay = FullLayout { t };
    let mut lp = LpProblem::new(lay.num_vars());
    for (i, p) in instance.packets().iter().enumerate() {
        lp.bounds[lay.y(i)] = (0.0, p.weight);
    }
    for i in 0..=t {
        lp.bounds[lay.left(i)] = (0.0, capacity);
        lp.bounds[lay.right(i)] = (0.0, capacity);
        lp.add_constraint(&[(lay.left(i), 1.0), (lay.right(i), 1.0)], Relation::Eq, capacity);
    }
    for (k, p) in instance.packets().iter().enumerate() {
        let i = k + 1;
        let s = p.direction.sign();
        // S_L,i - S_L,i-1 + s*y_i = 0 ; S_R,i - S_R,i-1 - s*y_i = 0
        lp.add_constraint(
            &[(lay.left(i), 1.0), (lay.left(i - 1), -1.0), (lay.y(k), s)],
            Relation::Eq,
            0.0,
        );
        lp.add_constraint(
            &[(lay.right(i), 1.0), (lay.right(i - 1), -1.0), (lay.y(k), -s)],
            Relation::Eq,
            0.0,
        );
    }
    set_objective(&mut lp, instance, |i| lay.y(i));
    Ok(lp)
}

/// Reduced form: columns `y_1..y_t` then `S_L,0` at index `t`.
pub fn build_reduced_lp(instance: &Instance, capacity: f64) -> Result<LpProblem> {
    check_fits(instance, capacity)?;
    let t = instance.len();
    let s0 = t;
    let mut lp = LpProblem::new(t + 1);
    for (i, p) in instance.packets().iter().enumerate() {
        lp.bounds[i] = (0.0, p.weight);
    }
    lp.bounds[s0] = (0.0, capacity);
    let mut terms = vec![(s0, 1.0)];
    for (i, p) in instance.packets().iter().enumerate() {
        terms.push((i, -p.direction.sign()));
        lp.add_constraint(&terms, Relation::Ge, 0.0);
        lp.add_constraint(&terms, Relation::Le, capacity);
    }
    set_objective(&mut lp, instance, |i| i);
    Ok(lp)
}

/// Tie-break objectives: maximize `y_1`, then `y_2`, and so on.
pub(crate) fn lexicographic_tie_breaks(num_vars: usize, t: usize) -> Vec<Vec<f64>> {
    (0..t)
        .map(|i| {
            let mut c = vec![0.0; num_vars];
            c[i] = -1.0;
            c
        })
        .collect()
}

/// Solves the reduced LP. Ties among optimal solutions are broken towards
/// lexicographically larger `y`.
pub fn solve_lp(instance: &Instance, capacity: f64) -> Result<FractionalSolution> {
    solve_lp_pinned(instance, capacity, &[])
}

/// As [`solve_lp`], with the packets at the given 0-based positions forced to
/// be accepted in full (`y_i = x_i`).
pub fn solve_lp_pinned(instance: &Instance, capacity: f64, pinned: &[usize]) -> Result<FractionalSolution> {
    let mut lp = build_reduced_lp(instance, capacity)?;
    for &i in pinned {
        let x = instance
            .packets()
            .get(i)
            .ok_or_else(|| Error::invalid(format!("pinned position {i} out of range")))?
            .weight;
        lp.bounds[i] = (x, x);
    }
    let t = instance.len();
    let sol = simplex::solve(&lp, &lexicographic_tie_breaks(t + 1, t))?;
    let y: Vec<f64> = instance
        .packets()
        .iter()
        .zip(&sol.x)
        .map(|(p, &v)| v.clamp(0.0, p.weight))
        .collect();
    Ok(fractional_from(instance, capacity, y, sol.x[t]))
}

/// Builds traces and objective from `y` and the starting left amount.
pub fn fractional_from(instance: &Instance, capacity: f64, y: Vec<f64>, start_left: f64) -> FractionalSolution {
    let mut left_trace = Vec::with_capacity(y.len() + 1);
    let mut left = start_left;
    left_trace.push(left);
    for (p, &yi) in instance.packets().iter().zip(&y) {
        left -= p.direction.sign() * yi;
        left_trace.push(left);
    }
    let right_trace = left_trace.iter().map(|l| capacity - l).collect();
    let objective = lp_objective(instance, &y);
    FractionalSolution {
        capacity,
        y,
        left_trace,
        right_trace,
        objective,
    }
}

/// `sum_i f (x_i - y_i) + m (x_i - y_i) / x_i`.
pub fn lp_objective(instance: &Instance, y: &[f64]) -> f64 {
    let (f, m) = (instance.f(), instance.m());
    instance
        .packets()
        .iter()
        .zip(y)
        .map(|(p, &yi)| {
            let gap = p.weight - yi;
            f * gap + m * gap / p.weight
        })
        .sum()
}

/// Optimal objective of the full form (cross-validation only).
pub fn solve_full_lp_objective(instance: &Instance, capacity: f64) -> Result<f64> {
    let lp = build_full_lp(instance, capacity)?;
    Ok(simplex::solve(&lp, &[])?.objective)
}

/// Checks the invariants of a fractional solution against `instance`.
pub fn validate_fractional(instance: &Instance, frac: &FractionalSolution) -> Result<()> {
    let t = instance.len();
    if frac.y.len() != t || frac.left_trace.len() != t + 1 || frac.right_trace.len() != t + 1 {
        return Err(Error::invalid("fractional solution has the wrong dimensions"));
    }
    let tol = TAU * (1.0 + frac.capacity);
    for (p, &y) in instance.packets().iter().zip(&frac.y) {
        if y < -tol || y > p.weight + tol {
            return Err(Error::invalid(format!("y_{} = {y} outside [0, {}]", p.index, p.weight)));
        }
    }
    for i in 0..=t {
        let (l, r) = (frac.left_trace[i], frac.right_trace[i]);
        if l < -tol || r < -tol || (l + r - frac.capacity).abs() > tol {
            return Err(Error::invalid(format!("trace step {i} is infeasible: S_L={l}, S_R={r}")));
        }
        if i > 0 {
            let p = &instance.packets()[i - 1];
            let expected = frac.left_trace[i - 1] - p.direction.sign() * frac.y[i - 1];
            if (expected - l).abs() > tol {
                return Err(Error::invalid(format!("trace step {i} does not follow the flow update")));
            }
        }
    }
    Ok(())
}

/// CSV rows `index,direction,weight,y,fraction` for the LP solution.
pub fn lp_csv(instance: &Instance, frac: &FractionalSolution) -> String {
    let mut out = String::from("index,direction,weight,y,fraction\n");
    for (p, &y) in instance.packets().iter().zip(&frac.y) {
        out.push_str(&format!(
            "{},{},{:.9},{:.9},{:.9}\n",
            p.index,
            p.direction,
            p.weight,
            y,
            y / p.weight
        ));
    }
    out
}
