//! Links whose end capacities can be shifted through the surrounding
//! network at a price.
//!
//! Before step `i` the LP may move `o+_i` from the right end to the left and
//! `o-_i` the other way, each costing `C (f + m / M)` per unit. Two
//! non-negative variables per step cover both shift directions.

use serde::{Deserialize, Serialize};

use crate::approx::{ApproxTrace, Constants, Engine, EngineConfig, ReserveHook, Reserves};
use crate::error::{Error, Result};
use crate::lp_bound::{check_fits, lexicographic_tie_breaks, set_objective, FractionalSolution, LpProblem, Relation};
use crate::model::{CostBreakdown, DecisionSolution, Instance, TAU};
use crate::simplex;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclicParams {
    pub c: f64,
}

impl CyclicParams {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 1.0) {
            return Err(Error::invalid(format!("redistribution multiplier must be at least 1, got {c}")));
        }
        Ok(CyclicParams { c })
    }
}

/// Columns: `y_1..y_t`, `S_L,0`, `o+_1..o+_t`, `o-_1..o-_t`.
pub struct CyclicLayout {
    pub t: usize,
}

impl CyclicLayout {
    pub fn start(&self) -> usize {
        self.t
    }
    pub fn o_plus(&self, i: usize) -> usize {
        self.t + 1 + i
    }
    pub fn o_minus(&self, i: usize) -> usize {
        2 * self.t + 1 + i
    }
    pub fn num_vars(&self) -> usize {
        3 * self.t + 1
    }
}

pub fn build_cyclic_lp(instance: &Instance, capacity: f64, params: CyclicParams) -> Result<LpProblem> {
    check_fits(instance, capacity)?;
    let t = instance.len();
    if capacity <= 0.0 && t > 0 {
        return Err(Error::invalid("cyclic LP needs a positive capacity"));
    }
    let lay = CyclicLayout { t };
    let mut lp = LpProblem::new(lay.num_vars());
    for (i, p) in instance.packets().iter().enumerate() {
        lp.bounds[i] = (0.0, p.weight);
        lp.bounds[lay.o_plus(i)] = (0.0, capacity);
        lp.bounds[lay.o_minus(i)] = (0.0, capacity);
    }
    lp.bounds[lay.start()] = (0.0, capacity);
    set_objective(&mut lp, instance, |i| i);
    if t > 0 {
        let unit = params.c * (instance.f() + instance.m() / capacity);
        for i in 0..t {
            lp.objective[lay.o_plus(i)] = unit;
            lp.objective[lay.o_minus(i)] = unit;
        }
    }

    // Left amount after the shift of step i and again after its packet.
    let mut terms = vec![(lay.start(), 1.0)];
    for (i, p) in instance.packets().iter().enumerate() {
        terms.push((lay.o_plus(i), 1.0));
        terms.push((lay.o_minus(i), -1.0));
        lp.add_constraint(&terms, Relation::Ge, 0.0);
        lp.add_constraint(&terms, Relation::Le, capacity);
        terms.push((i, -p.direction.sign()));
        lp.add_constraint(&terms, Relation::Ge, 0.0);
        lp.add_constraint(&terms, Relation::Le, capacity);
    }
    Ok(lp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicSolution {
    pub capacity: f64,
    pub y: Vec<f64>,
    pub o_plus: Vec<f64>,
    pub o_minus: Vec<f64>,
    pub start_left: f64,
    pub objective: f64,
}

impl CyclicSolution {
    /// Net shift towards the left end before each step.
    pub fn net_shift(&self) -> Vec<f64> {
        self.o_plus.iter().zip(&self.o_minus).map(|(a, b)| a - b).collect()
    }

    pub fn total_moved(&self) -> f64 {
        self.o_plus.iter().chain(&self.o_minus).sum()
    }

    /// The `y` part with its (shifted) capacity traces.
    pub fn to_fractional(&self, instance: &Instance) -> FractionalSolution {
        let mut left = self.start_left;
        let mut left_trace = vec![left];
        for ((p, &y), s) in instance.packets().iter().zip(&self.y).zip(self.net_shift()) {
            left += s - p.direction.sign() * y;
            left_trace.push(left);
        }
        let right_trace = left_trace.iter().map(|l| self.capacity - l).collect();
        FractionalSolution {
            capacity: self.capacity,
            y: self.y.clone(),
            left_trace,
            right_trace,
            objective: crate::lp_bound::lp_objective(instance, &self.y),
        }
    }
}

pub fn solve_cyclic_lp(instance: &Instance, capacity: f64, params: CyclicParams) -> Result<CyclicSolution> {
    let lp = build_cyclic_lp(instance, capacity, params)?;
    let t = instance.len();
    let lay = CyclicLayout { t };
    let sol = simplex::solve(&lp, &lexicographic_tie_breaks(lay.num_vars(), t))?;
    let clamp = |v: f64, hi: f64| v.clamp(0.0, hi);
    Ok(CyclicSolution {
        capacity,
        y: instance.packets().iter().enumerate().map(|(i, p)| clamp(sol.x[i], p.weight)).collect(),
        o_plus: (0..t).map(|i| clamp(sol.x[lay.o_plus(i)], capacity)).collect(),
        o_minus: (0..t).map(|i| clamp(sol.x[lay.o_minus(i)], capacity)).collect(),
        start_left: sol.x[lay.start()],
        objective: sol.objective,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochResult {
    pub solution: DecisionSolution,
    /// Reserve added to each end on top of the usual pool.
    pub buffer: f64,
    pub redistributions: usize,
    /// Steps (0-based) after which a redistribution happened.
    pub boundaries: Vec<usize>,
    pub redistribution_cost: f64,
    /// Capacity, rejections and redistributions.
    pub total: f64,
    /// Always true: this procedure carries no proven ratio.
    pub heuristic: bool,
    #[serde(skip)]
    pub trace: ApproxTrace,
}

struct EpochHook {
    net: Vec<f64>,
    moved: Vec<f64>,
    budget: f64,
    epoch_sum: f64,
    boundaries: Vec<usize>,
}

impl ReserveHook for EpochHook {
    fn apply(&mut self, positions: std::ops::Range<usize>, res: &mut Reserves, cfg: &EngineConfig) {
        for k in positions {
            // The LP trace moved; the physical split did not, so the
            // reserves absorb the difference.
            res.left -= self.net[k];
            res.right += self.net[k];
            self.epoch_sum += self.moved[k];
            let breach = res.left < cfg.floor - TAU || res.right < cfg.floor - TAU;
            if self.epoch_sum > self.budget + TAU || breach {
                self.boundaries.push(k);
                self.epoch_sum = 0.0;
                res.left = cfg.start;
                res.right = cfg.start;
            }
        }
    }
}

/// Runs the approximation on top of a cyclic LP solution. Each end gets an
/// extra `M / (1 + sqrt 3)` of reserve when any shift is used; once the
/// shifts of an epoch exceed that amount, or a reserve would run dry, the
/// reserves are rebalanced at cost `C (f M + m)`.
pub fn epoch_heuristic(
    instance: &Instance,
    capacity: f64,
    sol: &CyclicSolution,
    params: CyclicParams,
) -> Result<EpochResult> {
    let t = instance.len();
    if sol.y.len() != t || sol.o_plus.len() != t || sol.o_minus.len() != t {
        return Err(Error::invalid("cyclic solution has the wrong dimensions"));
    }
    let c = Constants::STANDARD;
    let frac = sol.to_fractional(instance);
    let budget = capacity / c.arat;
    let buffer = if sol.total_moved() > TAU { budget } else { 0.0 };
    let total = (1.0 + c.hibu) * capacity;
    let cfg = EngineConfig {
        threshold: c.hibu * capacity / 2.0,
        total,
        start: total / 2.0,
        floor: -buffer,
    };
    let engine = Engine::new(instance, capacity, &frac, c, cfg)?;
    let mut hook = EpochHook {
        net: sol.net_shift(),
        moved: sol.o_plus.iter().zip(&sol.o_minus).map(|(a, b)| a + b).collect(),
        budget,
        epoch_sum: 0.0,
        boundaries: Vec::new(),
    };
    let out = engine.run(&mut hook)?;
    let run = engine.finish(out, c.arat * capacity + 2.0 * buffer, 0.0);
    let redistributions = hook.boundaries.len();
    let redistribution_cost = redistributions as f64 * params.c * (instance.f() * capacity + instance.m());
    let cost = CostBreakdown::new(run.solution.cost.capacity_cost, run.solution.cost.rejection_cost);
    Ok(EpochResult {
        total: cost.total + redistribution_cost,
        solution: DecisionSolution { cost, ..run.solution },
        buffer,
        redistributions,
        boundaries: hook.boundaries,
        redistribution_cost,
        heuristic: true,
        trace: run.trace,
    })
}
