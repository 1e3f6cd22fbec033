//! Instance generators and the approximation-ratio experiment.
//!
//! Randomness comes from ChaCha8 seeded with `ChaCha8Rng::seed_from_u64`
//! on the record's 64-bit seed. The stream is fixed by the rand_chacha
//! crate, so a seed yields the same instance on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Direction, Instance};
use crate::oracle::exact_opt;
use crate::search;

pub const CSV_HEADER: &str = "# linkselect-ratios v1\nseed,t,f,m,opt_total,lp_best_bound,alg_total,ratio_vs_opt,ratio_vs_lb\n";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightDist {
    UniformInt { lo: u64, hi: u64 },
    UniformReal { lo: f64, hi: f64 },
    /// Density proportional to `w^-alpha` on `[lo, hi]`.
    PowerLaw { alpha: f64, lo: f64, hi: f64 },
}

impl WeightDist {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightDist::UniformInt { lo, hi } => lo >= 1 && lo <= hi,
            WeightDist::UniformReal { lo, hi } | WeightDist::PowerLaw { lo, hi, .. } => {
                lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi
            }
        };
        if let WeightDist::PowerLaw { alpha, .. } = *self {
            if !alpha.is_finite() {
                return Err(Error::invalid("power-law exponent must be finite"));
            }
        }
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid weight distribution bounds: {self:?}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            WeightDist::UniformInt { lo, hi } => rng.gen_range(lo..=hi) as f64,
            WeightDist::UniformReal { lo, hi } if lo == hi => lo,
            WeightDist::UniformReal { lo, hi } => rng.gen_range(lo..hi),
            WeightDist::PowerLaw { alpha, lo, hi } => {
                // Inverse CDF of the truncated density.
                let u: f64 = rng.gen();
                let w = if (alpha - 1.0).abs() < 1e-12 {
                    lo * (hi / lo).powf(u)
                } else {
                    let e = 1.0 - alpha;
                    (lo.powf(e) + u * (hi.powf(e) - lo.powf(e))).powf(1.0 / e)
                };
                w.clamp(lo, hi)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub t: usize,
    pub weight_dist: WeightDist,
    /// Probability that a packet goes left to right.
    pub p_right: f64,
    pub f: f64,
    pub m: f64,
    pub seed: u64,
}

pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    config.weight_dist.validate()?;
    if !(0.0..=1.0).contains(&config.p_right) {
        return Err(Error::invalid(format!("p_right must lie in [0, 1], got {}", config.p_right)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let packets: Vec<(Direction, f64)> = (0..config.t)
        .map(|_| {
            let d = if rng.gen_bool(config.p_right) {
                Direction::LeftToRight
            } else {
                Direction::RightToLeft
            };
            (d, config.weight_dist.sample(&mut rng))
        })
        .collect();
    Instance::new(config.f, config.m, packets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarialKind {
    Alternating,
    Drain,
    SubsetSumLike,
}

/// Reverse weight closing a subset-sum-like sequence: half the item sum.
pub fn subset_sum_like(f: f64, m: f64, items: &[u64]) -> Result<Instance> {
    let sum: u64 = items.iter().sum();
    let packets = items
        .iter()
        .map(|&w| (Direction::LeftToRight, w as f64))
        .chain(std::iter::once((Direction::RightToLeft, (sum / 2).max(1) as f64)));
    Instance::new(f, m, packets)
}

/// Structured sequences with `f = 1`, `m = 0`. `scale` is the weight, or
/// for `SubsetSumLike` the largest random item.
pub fn adversarial(kind: AdversarialKind, t: usize, scale: f64, seed: u64) -> Result<Instance> {
    if t == 0 {
        return Err(Error::invalid("adversarial sequences need t >= 1"));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::invalid(format!("scale must be positive, got {scale}")));
    }
    match kind {
        AdversarialKind::Alternating => Instance::new(
            1.0,
            0.0,
            (0..t).map(|k| (if k % 2 == 0 { Direction::LeftToRight } else { Direction::RightToLeft }, scale)),
        ),
        AdversarialKind::Drain => Instance::new(1.0, 0.0, (0..t).map(|_| (Direction::LeftToRight, scale))),
        AdversarialKind::SubsetSumLike => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hi = (scale.floor() as u64).max(1);
            let items: Vec<u64> = (0..t - 1).map(|_| rng.gen_range(1..=hi)).collect();
            subset_sum_like(1.0, 0.0, &items)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub seed: u64,
    pub t: usize,
    pub f: f64,
    pub m: f64,
    /// Absent when `t` exceeds the oracle limit.
    pub opt_total: Option<f64>,
    pub lp_best_bound: f64,
    pub alg_total: f64,
    pub ratio_vs_opt: Option<f64>,
    pub ratio_vs_lb: f64,
}

fn ratio(alg: f64, base: f64) -> f64 {
    if base > 0.0 {
        alg / base
    } else {
        1.0
    }
}

pub fn ratio_record(instance: &Instance, seed: u64, epsilon: f64, oracle_limit: usize) -> Result<RatioRecord> {
    let res = search::solve(instance, epsilon)?;
    let alg_total = res.best.cost.total;
    let lp_best_bound = res.lp_best_bound();
    let opt_total = if instance.len() <= oracle_limit {
        Some(exact_opt(instance, oracle_limit)?.total)
    } else {
        None
    };
    Ok(RatioRecord {
        seed,
        t: instance.len(),
        f: instance.f(),
        m: instance.m(),
        opt_total,
        lp_best_bound,
        alg_total,
        ratio_vs_opt: opt_total.map(|o| ratio(alg_total, o)),
        ratio_vs_lb: ratio(alg_total, lp_best_bound),
    })
}

/// One record per config, in input order.
pub fn ratio_experiment(configs: &[GeneratorConfig], epsilon: f64, oracle_limit: usize) -> Result<Vec<RatioRecord>> {
    configs
        .par_iter()
        .map(|c| ratio_record(&generate(c)?, c.seed, epsilon, oracle_limit))
        .collect()
}

pub fn records_to_csv(records: &[RatioRecord]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    for r in records {
        out.push_str(&format!(
            "{},{},{:.9},{:.9},{},{:.9},{:.9},{},{:.9}\n",
            r.seed,
            r.t,
            r.f,
            r.m,
            opt(r.opt_total),
            r.lp_best_bound,
            r.alg_total,
            opt(r.ratio_vs_opt),
            r.ratio_vs_lb
        ));
    }
    out
}

/// Plots both ratio columns against the seed.
pub fn gnuplot_script(csv_path: &str, epsilon: f64) -> String {
    let bound = (1.0 + epsilon) * crate::approx::Constants::STANDARD.arat;
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'seed'\n\
         set ylabel 'ratio'\n\
         plot '{csv_path}' every ::2 using 1:8 with points title 'ALG/OPT', \\\n     \
         '{csv_path}' every ::2 using 1:9 with points title 'ALG/LB', \\\n     \
         {bound:.9} with lines title 'bound'\n"
    )
}

/// Experiment description read from TOML by the `bench` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_oracle_limit")]
    pub oracle_limit: usize,
    pub seed: u64,
    pub count: u64,
    pub t: usize,
    pub weight_dist: WeightDist,
    #[serde(default = "default_p_right")]
    pub p_right: f64,
    pub f: f64,
    pub m: f64,
}

fn default_epsilon() -> f64 {
    search::DEFAULT_EPSILON
}
fn default_oracle_limit() -> usize {
    crate::oracle::DEFAULT_LIMIT
}
fn default_p_right() -> f64 {
    0.5
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("bench config: {}", e.message())))
    }

    /// Seeds `seed, seed + 1, ..., seed + count - 1`.
    pub fn generator_configs(&self) -> Vec<GeneratorConfig> {
        (0..self.count)
            .map(|k| GeneratorConfig {
                t: self.t,
                weight_dist: self.weight_dist,
                p_right: self.p_right,
                f: self.f,
                m: self.m,
                seed: self.seed.wrapping_add(k),
            })
            .collect()
    }

    pub fn run(&self) -> Result<Vec<RatioRecord>> {
        ratio_experiment(&self.generator_configs(), self.epsilon, self.oracle_limit)
    }
}
