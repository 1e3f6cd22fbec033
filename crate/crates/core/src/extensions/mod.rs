//! Cyclic redistribution on a single link, and networks with few packets
//! that span several links.

pub mod cyclic;
pub mod network;

pub use cyclic::{build_cyclic_lp, epoch_heuristic, solve_cyclic_lp, CyclicLayout, CyclicParams, CyclicSolution, EpochResult};
pub use network::{parse_network, solve_network_few_long, NetworkInstance, NetworkSolution};
