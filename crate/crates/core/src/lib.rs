//! Weighted packet selection on a rechargeable capacitated link.
//!
//! Given an ordered sequence of directed, weighted packets crossing a single
//! link, choose a total link capacity and an accept/reject decision per
//! packet minimizing capacity plus rejection cost `f * x + m`.
//!
//! The crate provides an exact enumeration oracle ([`oracle`]), the LP lower
//! bound ([`lp_bound`]), a constant-factor approximation ([`approx`]) driven
//! by a geometric capacity search ([`search`]), the subset-sum reduction
//! ([`hardness`]), network and redistribution extensions ([`extensions`]) and
//! a reproducible benchmark harness ([`harness`]).

pub mod approx;
pub mod error;
pub mod extensions;
pub mod fullaccept;
pub mod hardness;
pub mod harness;
pub mod lp_bound;
pub mod model;
pub mod oracle;
pub mod search;
pub mod simplex;

pub use error::{Error, Result};
pub use model::{
    min_capacity_for_decisions, parse_instance, CostBreakdown, Decision, DecisionSolution, Direction, Instance,
    Packet, TAU,
};
