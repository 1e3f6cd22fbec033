//! Subset-sum reduction.
//!
//! Items become left-to-right packets, followed by one right-to-left packet
//! of weight `S`, with `f = 3/4` and `m = 0`. A subset summing to `S` exists
//! iff the optimum is at most `S/4 + (3/4) sum(items)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Direction, Instance, TAU};
use crate::oracle::exact_opt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSumInstance {
    pub items: Vec<u64>,
    pub target: u64,
}

impl SubsetSumInstance {
    pub fn new(items: Vec<u64>, target: u64) -> Result<Self> {
        if items.contains(&0) {
            return Err(Error::invalid("subset-sum items must be at least 1"));
        }
        if target == 0 {
            return Err(Error::invalid("subset-sum target must be at least 1"));
        }
        Ok(SubsetSumInstance { items, target })
    }

    /// Direct enumeration over all subsets (bitset of reachable sums).
    pub fn subset_exists(&self) -> bool {
        let s = self.target as usize;
        let mut reach = vec![false; s + 1];
        reach[0] = true;
        for &it in &self.items {
            let it = it as usize;
            if it > s {
                continue;
            }
            for v in (it..=s).rev() {
                if reach[v - it] {
                    reach[v] = true;
                }
            }
        }
        reach[s]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutput {
    pub wps: Instance,
    pub threshold: f64,
}

pub fn reduce(ss: &SubsetSumInstance) -> ReductionOutput {
    let packets = ss
        .items
        .iter()
        .map(|&w| (Direction::LeftToRight, w as f64))
        .chain(std::iter::once((Direction::RightToLeft, ss.target as f64)));
    let wps = Instance::new(0.75, 0.0, packets).expect("positive integer weights");
    let sum: u64 = ss.items.iter().sum();
    ReductionOutput {
        wps,
        threshold: ss.target as f64 / 4.0 + 0.75 * sum as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub equivalent: bool,
    pub opt: f64,
    pub threshold: f64,
    pub subset_exists: bool,
    /// Accepted left-to-right weight `A` in the oracle's witness.
    pub accepted_items: f64,
    /// `min(max(S - A, 0), 3S/4) - (S - A)/4` for that `A`.
    pub gap: f64,
}

pub fn verify_reduction(ss: &SubsetSumInstance, limit: usize) -> Result<Verification> {
    let red = reduce(ss);
    let exact = exact_opt(&red.wps, limit)?;
    let subset_exists = ss.subset_exists();
    let below = exact.total <= red.threshold + TAU;

    let n = ss.items.len();
    let accepted_items: f64 = ss
        .items
        .iter()
        .zip(&exact.decisions[..n])
        .filter(|(_, d)| d.is_accept())
        .map(|(&w, _)| w as f64)
        .sum();
    let s = ss.target as f64;
    let gap = (s - accepted_items).max(0.0).min(0.75 * s) - (s - accepted_items) / 4.0;
    Ok(Verification {
        equivalent: below == subset_exists,
        opt: exact.total,
        threshold: red.threshold,
        subset_exists,
        accepted_items,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Direction::*;

    fn ss(items: &[u64], target: u64) -> SubsetSumInstance {
        SubsetSumInstance::new(items.to_vec(), target).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let r = reduce(&ss(&[1, 2, 3], 3));
        assert_eq!(r.threshold, 5.25);
        let dirs: Vec<_> = r.wps.packets().iter().map(|p| (p.direction, p.weight)).collect();
        assert_eq!(dirs, vec![(LeftToRight, 1.0), (LeftToRight, 2.0), (LeftToRight, 3.0), (RightToLeft, 3.0)]);
        assert_eq!((r.wps.f(), r.wps.m()), (0.75, 0.0));
        assert_eq!(reduce(&ss(&[1], 1)).threshold, 1.0);
        assert_eq!(reduce(&ss(&[5], 3)).threshold, 4.5);
    }

    #[test]
    fn verify_examples() {
        let v = verify_reduction(&ss(&[1, 2, 3], 3), 20).unwrap();
        assert!(v.subset_exists && v.equivalent && v.opt <= 5.25);

        let v = verify_reduction(&ss(&[2], 1), 20).unwrap();
        assert_eq!(v.threshold, 1.75);
        assert!(!v.subset_exists && v.equivalent && v.opt > 1.75);

        let v = verify_reduction(&ss(&[5], 3), 20).unwrap();
        assert!(!v.subset_exists && v.opt > 4.5);

        let v = verify_reduction(&ss(&[], 1), 20).unwrap();
        assert!(!v.subset_exists && v.equivalent);
        assert_eq!(reduce(&ss(&[], 1)).wps.len(), 1);
    }

    #[test]
    fn invalid_inputs() {
        assert!(SubsetSumInstance::new(vec![0, 1], 1).is_err());
        assert!(SubsetSumInstance::new(vec![1], 0).is_err());
        assert!(verify_reduction(&ss(&[1, 1, 1], 1), 3).is_err());
    }
}
