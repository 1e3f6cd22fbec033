//! Replay of an LP solution on a link of doubled capacity.
//!
//! The link carries the LP traces (`M`) plus a reserve pool (`M`) split
//! between the two ends. A packet's accepted LP share `y_i` always moves
//! through the traces; the remainder `x_i - y_i` is drawn from the sender's
//! reserve. On rejection the traces still move by `y_i`, which the reserves
//! absorb in the opposite direction. Every packet with `y_i = x_i` is
//! accepted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp_bound::{validate_fractional, FractionalSolution};
use crate::model::{Decision, Direction, Instance, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Variant {
    /// Accept whenever the sender's reserve covers `x_i - y_i`.
    #[default]
    GreedyLeft,
    /// Reject whenever the receiver's reserve can absorb `y_i`; accept only
    /// full packets and packets whose rejection is infeasible.
    LazyRight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReserveTrace {
    pub reserve_left: Vec<f64>,
    pub reserve_right: Vec<f64>,
    pub decisions: Vec<Decision>,
}

impl ReserveTrace {
    /// Debug export: `step,direction,weight,y,decision,RL,RR`.
    pub fn to_csv(&self, instance: &Instance, frac: &FractionalSolution) -> String {
        let mut out = String::from("step,direction,weight,y,decision,RL,RR\n");
        for (k, p) in instance.packets().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:.9},{:.9},{},{:.9},{:.9}\n",
                k + 1,
                p.direction,
                p.weight,
                frac.y[k],
                self.decisions[k].as_char(),
                self.reserve_left[k + 1],
                self.reserve_right[k + 1]
            ));
        }
        out
    }
}

pub fn run_accept_full(
    instance: &Instance,
    capacity: f64,
    frac: &FractionalSolution,
    r_left0: f64,
    r_right0: f64,
    variant: Variant,
) -> Result<ReserveTrace> {
    let tol = TAU * (1.0 + capacity);
    if r_left0 < -tol || r_right0 < -tol || (r_left0 + r_right0 - capacity).abs() > tol {
        return Err(Error::invalid(format!(
            "initial reserves ({r_left0}, {r_right0}) must be non-negative and sum to {capacity}"
        )));
    }
    if let Some(p) = instance.packets().iter().find(|p| p.weight > capacity + TAU) {
        return Err(Error::invalid(format!("packet {} exceeds capacity {capacity}", p.index)));
    }
    if (frac.capacity - capacity).abs() > tol {
        return Err(Error::invalid("fractional solution was computed for a different capacity"));
    }
    validate_fractional(instance, frac)?;

    let t = instance.len();
    let mut trace = ReserveTrace {
        reserve_left: Vec::with_capacity(t + 1),
        reserve_right: Vec::with_capacity(t + 1),
        decisions: Vec::with_capacity(t),
    };
    let (mut rl, mut rr) = (r_left0, r_right0);
    trace.reserve_left.push(rl);
    trace.reserve_right.push(rr);

    for (p, &y) in instance.packets().iter().zip(&frac.y) {
        // View the reserves from the sender's side.
        let (send, recv) = match p.direction {
            Direction::LeftToRight => (&mut rl, &mut rr),
            Direction::RightToLeft => (&mut rr, &mut rl),
        };
        let gap = p.weight - y;
        let accept = match variant {
            Variant::GreedyLeft => *send >= gap - TAU,
            Variant::LazyRight => gap <= TAU || *recv < y - TAU,
        };
        if accept {
            *send -= gap;
            *recv += gap;
            trace.decisions.push(Decision::Accept);
        } else {
            *send += y;
            *recv -= y;
            trace.decisions.push(Decision::Reject);
        }
        trace.reserve_left.push(rl);
        trace.reserve_right.push(rr);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp_bound::solve_lp;
    use crate::model::Direction::*;

    fn inst(f: f64, m: f64, ps: &[(Direction, f64)]) -> Instance {
        Instance::new(f, m, ps.iter().copied()).unwrap()
    }

    #[test]
    fn everything_full_is_accepted() {
        let i = inst(1.0, 0.0, &[(LeftToRight, 2.0), (RightToLeft, 3.0), (LeftToRight, 1.0)]);
        let frac = solve_lp(&i, 3.0).unwrap();
        assert_eq!(frac.y, vec![2.0, 3.0, 1.0]);
        for v in [Variant::GreedyLeft, Variant::LazyRight] {
            let tr = run_accept_full(&i, 3.0, &frac, 1.5, 1.5, v).unwrap();
            assert!(tr.decisions.iter().all(|d| d.is_accept()));
            assert_eq!(tr.reserve_left.last(), Some(&1.5));
        }
    }

    #[test]
    fn empty_instance() {
        let i = inst(1.0, 0.0, &[]);
        let frac = solve_lp(&i, 1.0).unwrap();
        let tr = run_accept_full(&i, 1.0, &frac, 0.5, 0.5, Variant::GreedyLeft).unwrap();
        assert!(tr.decisions.is_empty());
        assert_eq!(tr.reserve_left, vec![0.5]);
    }

    #[test]
    fn two_forward_packets_hand_replay() {
        let i = inst(1.0, 0.0, &[(LeftToRight, 1.0), (LeftToRight, 1.0)]);
        let frac = solve_lp(&i, 1.0).unwrap();
        assert_eq!(frac.y, vec![1.0, 0.0]);
        let tr = run_accept_full(&i, 1.0, &frac, 0.5, 0.5, Variant::GreedyLeft).unwrap();
        assert_eq!(tr.decisions, vec![Decision::Accept, Decision::Reject]);
        assert_eq!(tr.reserve_left, vec![0.5, 0.5, 0.5]);
        assert_eq!(tr.reserve_right, vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn bad_reserves_rejected() {
        let i = inst(1.0, 0.0, &[(LeftToRight, 1.0)]);
        let frac = solve_lp(&i, 1.0).unwrap();
        assert!(run_accept_full(&i, 1.0, &frac, 0.7, 0.7, Variant::GreedyLeft).is_err());
        assert!(run_accept_full(&i, 1.0, &frac, -0.1, 1.1, Variant::GreedyLeft).is_err());
    }

    #[test]
    fn csv_header() {
        let i = inst(1.0, 0.0, &[(LeftToRight, 1.0)]);
        let frac = solve_lp(&i, 1.0).unwrap();
        let tr = run_accept_full(&i, 1.0, &frac, 0.5, 0.5, Variant::GreedyLeft).unwrap();
        let csv = tr.to_csv(&i, &frac);
        assert!(csv.starts_with("step,direction,weight,y,decision,RL,RR\n1,->,1.000000000,"));
    }
}
