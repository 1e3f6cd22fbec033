//! Geometric capacity search.
//!
//! The fixed-capacity approximation is run for every `M` in
//! `{0} ∪ {x_min (1+ε)^k <= M_max} ∪ {M_max}` and the cheapest outcome wins.
//! Some grid point lies within a `(1+ε)` factor above the optimal capacity,
//! which is what the overall ratio bound rests on.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{run_approx, ApproxTrace, Constants};
use crate::error::{Error, Result};
use crate::lp_bound::{preprocess_oversized, solve_lp_pinned};
use crate::model::{m_max, min_capacity_for_decisions, x_min, CostBreakdown, Decision, DecisionSolution, Instance, TAU};

pub const DEFAULT_EPSILON: f64 = 0.1;
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityGrid {
    pub epsilon: f64,
    pub values: Vec<f64>,
}

pub fn capacity_grid(x_min: f64, m_max: f64, epsilon: f64) -> Result<CapacityGrid> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut values = vec![0.0];
    if m_max <= 0.0 {
        return Ok(CapacityGrid { epsilon, values });
    }
    if !(x_min > 0.0 && x_min <= m_max) {
        return Err(Error::invalid(format!("need 0 < x_min <= M_max, got {x_min}, {m_max}")));
    }
    let limit = m_max * (1.0 - 1e-12);
    for k in 0.. {
        let v = x_min * (1.0 + epsilon).powi(k);
        if v >= limit {
            break;
        }
        values.push(v);
        if values.len() > MAX_GRID_POINTS {
            return Err(Error::invalid(format!(
                "capacity grid exceeds {MAX_GRID_POINTS} points; increase epsilon"
            )));
        }
    }
    values.push(m_max);
    Ok(CapacityGrid { epsilon, values })
}

/// Grid for an instance; `{0}` when it is empty.
pub fn instance_grid(instance: &Instance, epsilon: f64) -> Result<CapacityGrid> {
    if instance.is_empty() {
        return capacity_grid(0.0, 0.0, epsilon);
    }
    capacity_grid(x_min(instance)?, m_max(instance), epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointResult {
    pub capacity: f64,
    pub lp_objective: f64,
    pub forced_cost: f64,
    /// `lp_objective + forced_cost + M / (1 + ε)`.
    pub lower_bound_term: f64,
    /// Decisions over the whole instance; forced rejections included.
    pub alg_solution: DecisionSolution,
    /// 0-based original positions that survived preprocessing.
    pub kept: Vec<usize>,
    #[serde(skip)]
    pub trace: ApproxTrace,
}

impl GridPointResult {
    /// Rejection cost of the algorithm on kept packets only.
    pub fn alg_rejection_on_kept(&self) -> f64 {
        self.alg_solution.cost.rejection_cost - self.forced_cost
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub epsilon: f64,
    pub best: DecisionSolution,
    pub best_index: usize,
    pub points: Vec<GridPointResult>,
}

impl SearchResult {
    pub fn best_point(&self) -> &GridPointResult {
        &self.points[self.best_index]
    }

    /// `min_M (LB_M + forced_M + M / (1+ε))`, a lower bound on the optimum.
    pub fn lp_best_bound(&self) -> f64 {
        self.points.iter().map(|p| p.lower_bound_term).fold(f64::INFINITY, f64::min)
    }
}

/// Runs preprocessing, the LP, and the approximation at one capacity.
/// `pinned` lists original positions that must be accepted; `None` is
/// returned when one of them cannot fit `capacity`.
pub fn evaluate_point(instance: &Instance, capacity: f64, epsilon: f64, pinned: &[usize]) -> Result<Option<GridPointResult>> {
    if !pinned.is_empty() && pinned_capacity(instance, pinned)? > capacity + TAU {
        return Ok(None);
    }
    let pre = preprocess_oversized(instance, capacity);
    let mut sub_pinned = Vec::with_capacity(pinned.len());
    for &pos in pinned {
        match pre.kept.binary_search(&pos) {
            Ok(k) => sub_pinned.push(k),
            Err(_) => return Ok(None),
        }
    }
    let frac = solve_lp_pinned(&pre.sub_instance, capacity, &sub_pinned)?;
    let run = run_approx(&pre.sub_instance, capacity, &frac, pre.forced_cost)?;

    let mut decisions = vec![Decision::Reject; instance.len()];
    for (k, &pos) in pre.kept.iter().enumerate() {
        decisions[pos] = run.solution.decisions[k];
    }
    let capacity_cost = Constants::STANDARD.arat * capacity;
    let alg_solution = DecisionSolution {
        capacity: capacity_cost,
        initial_left: run.solution.initial_left,
        decisions,
        cost: CostBreakdown::new(capacity_cost, run.solution.cost.rejection_cost),
    };
    Ok(Some(GridPointResult {
        capacity,
        lp_objective: frac.objective,
        forced_cost: pre.forced_cost,
        lower_bound_term: frac.objective + pre.forced_cost + capacity / (1.0 + epsilon),
        alg_solution,
        kept: pre.kept,
        trace: run.trace,
    }))
}

pub fn solve(instance: &Instance, epsilon: f64) -> Result<SearchResult> {
    solve_pinned(instance, epsilon, &[])
}

/// Capacity needed to accept exactly the `pinned` packets.
fn pinned_capacity(instance: &Instance, pinned: &[usize]) -> Result<f64> {
    let mut decisions = vec![Decision::Reject; instance.len()];
    for &pos in pinned {
        *decisions
            .get_mut(pos)
            .ok_or_else(|| Error::invalid(format!("pinned position {pos} out of range")))? = Decision::Accept;
    }
    Ok(min_capacity_for_decisions(instance, &decisions)?.0)
}

/// Capacity search where the packets at `pinned` (0-based) must be accepted.
pub fn solve_pinned(instance: &Instance, epsilon: f64, pinned: &[usize]) -> Result<SearchResult> {
    let mut grid = instance_grid(instance, epsilon)?;
    if !pinned.is_empty() {
        // Accepting only a subset can need more room than accepting everything.
        let need = pinned_capacity(instance, pinned)?;
        if need > grid.values.last().copied().unwrap_or(0.0) {
            grid.values.push(need);
        }
    }
    let evaluated: Vec<Option<GridPointResult>> = grid
        .values
        .par_iter()
        .map(|&cap| evaluate_point(instance, cap, epsilon, pinned))
        .collect::<Result<_>>()?;
    let points: Vec<GridPointResult> = evaluated.into_iter().flatten().collect();

    let mut best_index: Option<usize> = None;
    for (k, p) in points.iter().enumerate() {
        let better = match best_index {
            None => true,
            Some(b) => p.alg_solution.cost.total < points[b].alg_solution.cost.total,
        };
        if better {
            best_index = Some(k);
        }
    }
    let best_index =
        best_index.ok_or_else(|| Error::Invariant("no feasible capacity on the search grid".into()))?;
    debug_assert!(points[best_index].alg_solution.cost.total >= -TAU);
    Ok(SearchResult {
        epsilon,
        best: points[best_index].alg_solution.clone(),
        best_index,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Direction::*;

    #[test]
    fn grid_examples() {
        let g = capacity_grid(1.0, 10.0, 1.0).unwrap();
        assert_eq!(g.values, vec![0.0, 1.0, 2.0, 4.0, 8.0, 10.0]);
        assert_eq!(capacity_grid(5.0, 5.0, 0.3).unwrap().values, vec![0.0, 5.0]);
        let empty = Instance::empty(1.0, 0.0).unwrap();
        assert_eq!(instance_grid(&empty, 0.1).unwrap().values, vec![0.0]);
        assert_eq!(capacity_grid(1.0, 8.0, 1.0).unwrap().values, vec![0.0, 1.0, 2.0, 4.0, 8.0]);
        assert!(capacity_grid(1.0, 10.0, 0.0).is_err());
        assert!(capacity_grid(1.0, 10.0, -1.0).is_err());
    }

    #[test]
    fn grid_size_bound() {
        for &(xm, mm, eps) in &[(1.0, 10.0, 1.0), (0.3, 97.0, 0.1), (2.0, 2.5, 0.05), (1.0, 1000.0, 0.01)] {
            let g = capacity_grid(xm, mm, eps).unwrap();
            let bound = 2.0 + (mm / xm).ln() / (1.0 + eps).ln();
            assert!(g.values.len() as f64 <= bound + 1.0, "{xm} {mm} {eps}: {}", g.values.len());
            assert!(g.values.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn empty_instance_costs_nothing() {
        let i = Instance::empty(1.0, 0.0).unwrap();
        let r = solve(&i, 0.1).unwrap();
        assert_eq!(r.best.cost.total, 0.0);
        assert_eq!(r.best_point().capacity, 0.0);
    }

    #[test]
    fn single_packet_accept_vs_reject() {
        let expensive = Instance::new(10.0, 0.0, [(LeftToRight, 1.0)]).unwrap();
        let r = solve(&expensive, 0.1).unwrap();
        assert_eq!(r.best_point().capacity, 1.0);
        assert!((r.best.cost.total - Constants::STANDARD.arat).abs() < 1e-12);
        assert!(r.best.decisions[0].is_accept());

        let cheap = Instance::new(0.1, 0.0, [(LeftToRight, 1.0)]).unwrap();
        let r = solve(&cheap, 0.1).unwrap();
        assert_eq!(r.best_point().capacity, 0.0);
        assert!((r.best.cost.total - 0.1).abs() < 1e-12);
    }

    #[test]
    fn lp_objective_monotone_along_grid() {
        let i = Instance::new(
            1.0,
            0.5,
            [(LeftToRight, 3.0), (LeftToRight, 2.0), (RightToLeft, 4.0), (LeftToRight, 1.0), (LeftToRight, 5.0)],
        )
        .unwrap();
        let r = solve(&i, 0.2).unwrap();
        let totals: Vec<f64> = r.points.iter().map(|p| p.lp_objective + p.forced_cost).collect();
        assert!(totals.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{totals:?}");
    }

    #[test]
    fn pinned_points_skip_small_capacities() {
        let i = Instance::new(0.1, 0.0, [(LeftToRight, 2.0), (LeftToRight, 1.0)]).unwrap();
        let r = solve_pinned(&i, 0.5, &[0]).unwrap();
        assert!(r.points.iter().all(|p| p.capacity >= 2.0));
        assert!(r.best.decisions[0].is_accept());
    }
}
