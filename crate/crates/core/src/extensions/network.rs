//! Several links, with a few packets whose route spans more than one link.
//!
//! Every subset of long packets is tried: the chosen ones are pinned to full
//! acceptance on each link they cross, the others are rejected and charged
//! once. Short packets are decided per link by the capacity search.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{parse_decimal, rejection_cost, Decision, DecisionSolution, Direction, Instance};
use crate::search::solve_pinned;

pub const DEFAULT_LONG_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetPacket {
    pub weight: f64,
    /// `(link index, direction)`; forward is left to right.
    pub path: Vec<(usize, Direction)>,
}

impl NetPacket {
    pub fn is_long(&self) -> bool {
        self.path.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    pub f: f64,
    pub m: f64,
    pub links: Vec<String>,
    pub packets: Vec<NetPacket>,
}

impl NetworkInstance {
    pub fn long_packets(&self) -> Vec<usize> {
        (0..self.packets.len()).filter(|&k| self.packets[k].is_long()).collect()
    }

    /// Packets crossing `link`, in global order, with their directions.
    fn link_traffic(&self, link: usize) -> Vec<(usize, Direction)> {
        self.packets
            .iter()
            .enumerate()
            .filter_map(|(k, p)| p.path.iter().find(|(l, _)| *l == link).map(|&(_, d)| (k, d)))
            .collect()
    }
}

pub fn parse_network(text: &str) -> Result<NetworkInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (n, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header `wpsnet v1`"))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["wpsnet", "v1"] {
        return Err(Error::parse(n, "expected header `wpsnet v1`"));
    }
    let mut scalar = |key: &str| -> Result<f64> {
        let (n, line) = lines.next().ok_or_else(|| Error::parse(n, format!("missing `{key}` line")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 || toks[0] != key {
            return Err(Error::parse(n, format!("expected `{key} <decimal>`")));
        }
        if toks[1].starts_with('-') {
            return Err(Error::parse(n, format!("negative {key}")));
        }
        parse_decimal(toks[1]).ok_or_else(|| Error::parse(n, format!("invalid decimal `{}`", toks[1])))
    };
    let f = scalar("f")?;
    let m = scalar("m")?;

    let mut links = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut packets = Vec::new();
    for (n, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["link", id] => {
                if !packets.is_empty() {
                    return Err(Error::parse(n, "links must be declared before packets"));
                }
                if ids.insert(id.to_string(), links.len()).is_some() {
                    return Err(Error::parse(n, format!("duplicate link `{id}`")));
                }
                links.push(id.to_string());
            }
            ["packet", w, route] => {
                let weight = match parse_decimal(w) {
                    Some(v) if v > 0.0 => v,
                    _ if w.starts_with('-') || parse_decimal(w).is_some() => {
                        return Err(Error::parse(n, "non-positive weight"))
                    }
                    _ => return Err(Error::parse(n, format!("invalid decimal `{w}`"))),
                };
                let mut path = Vec::new();
                for hop in route.split(',') {
                    let (id, dir) = hop
                        .split_once(':')
                        .ok_or_else(|| Error::parse(n, format!("expected `<link>:<fwd|rev>`, got `{hop}`")))?;
                    let link = *ids.get(id).ok_or_else(|| Error::parse(n, format!("unknown link `{id}`")))?;
                    let dir = match dir {
                        "fwd" => Direction::LeftToRight,
                        "rev" => Direction::RightToLeft,
                        _ => return Err(Error::parse(n, format!("direction must be fwd or rev, got `{dir}`"))),
                    };
                    if path.iter().any(|&(l, _)| l == link) {
                        return Err(Error::parse(n, format!("route crosses link `{id}` twice")));
                    }
                    path.push((link, dir));
                }
                packets.push(NetPacket { weight, path });
            }
            _ => return Err(Error::parse(n, format!("unrecognized line `{line}`"))),
        }
    }
    if !(f.is_finite() && m.is_finite()) {
        return Err(Error::invalid("f and m must be finite"));
    }
    Ok(NetworkInstance { f, m, links, packets })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSolution {
    pub link: String,
    /// Global 0-based packet positions in this link's sub-instance.
    pub packets: Vec<usize>,
    pub solution: DecisionSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSolution {
    pub per_link: Vec<LinkSolution>,
    /// Global positions of accepted long packets.
    pub accepted_long: Vec<usize>,
    pub rejected_long_cost: f64,
    pub total: f64,
    pub subsets_tried: usize,
}

fn solve_subset(net: &NetworkInstance, epsilon: f64, long: &[usize], mask: u64) -> Result<Option<NetworkSolution>> {
    let accepted: Vec<usize> = (0..long.len()).filter(|b| mask >> b & 1 == 1).map(|b| long[b]).collect();
    let rejected_long_cost: f64 = (0..long.len())
        .filter(|b| mask >> b & 1 == 0)
        .map(|b| rejection_cost(net.f, net.m, net.packets[long[b]].weight))
        .sum();

    let mut per_link = Vec::with_capacity(net.links.len());
    let mut total = rejected_long_cost;
    for (link, name) in net.links.iter().enumerate() {
        let traffic: Vec<(usize, Direction)> = net
            .link_traffic(link)
            .into_iter()
            .filter(|(k, _)| !net.packets[*k].is_long() || accepted.contains(k))
            .collect();
        let instance = Instance::new(net.f, net.m, traffic.iter().map(|&(k, d)| (d, net.packets[k].weight)))?;
        let pinned: Vec<usize> = (0..traffic.len()).filter(|&j| accepted.contains(&traffic[j].0)).collect();
        let result = match solve_pinned(&instance, epsilon, &pinned) {
            Ok(r) => r,
            Err(Error::Invariant(_)) if !pinned.is_empty() => return Ok(None),
            Err(e) => return Err(e),
        };
        if pinned.iter().any(|&j| result.best.decisions[j] != Decision::Accept) {
            return Err(Error::Invariant(format!("pinned packet dropped on link `{name}`")));
        }
        total += result.best.cost.total;
        per_link.push(LinkSolution {
            link: name.clone(),
            packets: traffic.iter().map(|&(k, _)| k).collect(),
            solution: result.best,
        });
    }
    Ok(Some(NetworkSolution {
        per_link,
        accepted_long: accepted,
        rejected_long_cost,
        total,
        subsets_tried: 0,
    }))
}

pub fn solve_network_few_long(net: &NetworkInstance, epsilon: f64, long_limit: usize) -> Result<NetworkSolution> {
    let long = net.long_packets();
    if long.len() > long_limit || long.len() >= 63 {
        return Err(Error::SizeLimit {
            size: long.len(),
            limit: long_limit.min(62),
        });
    }
    let subsets = 1u64 << long.len();
    let results: Vec<Option<NetworkSolution>> = (0..subsets)
        .into_par_iter()
        .map(|mask| solve_subset(net, epsilon, &long, mask))
        .collect::<Result<_>>()?;
    let mut best: Option<NetworkSolution> = None;
    for r in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| r.total < b.total) {
            best = Some(r);
        }
    }
    let mut best = best.ok_or_else(|| Error::Invariant("no subset of long packets is feasible".into()))?;
    best.subsets_tried = subsets as usize;
    Ok(best)
}
