//! Exhaustive optimum for small instances.
//!
//! Depth-first enumeration of all `2^t` decision vectors. Each node carries
//! the running drain, its running max/min, and the rejection cost so far, so
//! every vector is costed in amortized O(1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{min_capacity_for_decisions, Decision, Instance, TAU};

pub const DEFAULT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub total: f64,
    pub capacity_cost: f64,
    pub rejection_cost: f64,
    pub decisions: Vec<Decision>,
    pub initial_left: f64,
}

struct Search {
    signed: Vec<f64>,
    reject_cost: Vec<f64>,
    /// Capacity ceiling; `None` means capacity is paid for instead.
    capacity_cap: Option<f64>,
    current: Vec<Decision>,
    best: Option<Best>,
}

struct Best {
    cost: f64,
    accepts: usize,
    capacity: f64,
    decisions: Vec<Decision>,
}

impl Search {
    fn new(instance: &Instance, capacity_cap: Option<f64>) -> Search {
        Search {
            signed: instance.packets().iter().map(|p| p.direction.sign() * p.weight).collect(),
            reject_cost: instance.packets().iter().map(|p| instance.rejection_cost(p)).collect(),
            capacity_cap,
            current: Vec::with_capacity(instance.len()),
            best: None,
        }
    }

    fn run(&mut self, k: usize, drain: f64, hi: f64, lo: f64, rejected: f64, accepts: usize) {
        if k == self.signed.len() {
            let cost = match self.capacity_cap {
                Some(_) => rejected,
                None => (hi - lo) + rejected,
            };
            let better = match &self.best {
                None => true,
                Some(b) => {
                    cost < b.cost - TAU
                        || (cost <= b.cost + TAU
                            && (accepts > b.accepts || (accepts == b.accepts && hi - lo < b.capacity - TAU)))
                }
            };
            if better {
                self.best = Some(Best {
                    cost,
                    accepts,
                    capacity: hi - lo,
                    decisions: self.current.clone(),
                });
            }
            return;
        }
        // Accept first so that among equal vectors the earliest-accepting one
        // is met first.
        let d = drain + self.signed[k];
        let (nhi, nlo) = (hi.max(d), lo.min(d));
        if self.capacity_cap.is_none_or(|cap| nhi - nlo <= cap + TAU) {
            self.current.push(Decision::Accept);
            self.run(k + 1, d, nhi, nlo, rejected, accepts + 1);
            self.current.pop();
        }
        self.current.push(Decision::Reject);
        self.run(k + 1, drain, hi, lo, rejected + self.reject_cost[k], accepts);
        self.current.pop();
    }
}

fn check_limit(instance: &Instance, limit: usize) -> Result<()> {
    if instance.len() > limit {
        return Err(Error::SizeLimit {
            size: instance.len(),
            limit,
        });
    }
    Ok(())
}

/// Optimal total cost. Ties within `TAU` prefer more accepted packets, then
/// smaller capacity, then the lexicographically earliest accepts.
pub fn exact_opt(instance: &Instance, limit: usize) -> Result<ExactResult> {
    check_limit(instance, limit)?;
    let mut s = Search::new(instance, None);
    s.run(0, 0.0, 0.0, 0.0, 0.0, 0);
    let best = s.best.expect("enumeration visits at least one vector");
    let (capacity_cost, initial_left) = min_capacity_for_decisions(instance, &best.decisions)?;
    let rejection_cost = crate::model::rejected_cost(instance, &best.decisions);
    Ok(ExactResult {
        total: capacity_cost + rejection_cost,
        capacity_cost,
        rejection_cost,
        decisions: best.decisions,
        initial_left,
    })
}

/// Minimum rejection cost among decision vectors that fit capacity `M`.
pub fn exact_opt_fixed_capacity(instance: &Instance, capacity: f64, limit: usize) -> Result<(f64, Vec<Decision>)> {
    check_limit(instance, limit)?;
    if !(capacity.is_finite() && capacity >= 0.0) {
        return Err(Error::invalid(format!("capacity must be non-negative, got {capacity}")));
    }
    let mut s = Search::new(instance, Some(capacity));
    s.run(0, 0.0, 0.0, 0.0, 0.0, 0);
    let best = s.best.expect("the all-reject vector always fits");
    let opt_r = crate::model::rejected_cost(instance, &best.decisions);
    Ok((opt_r, best.decisions))
}
