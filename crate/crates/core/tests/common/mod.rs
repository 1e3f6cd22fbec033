//! Independent reference computations and instance corpora for the
//! integration tests. Nothing here calls the solver code it is used to check.

#![allow(dead_code)]

use linkselect::model::{Direction, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ARAT: f64 = 2.732_050_807_568_877;
pub const HIBU: f64 = 0.732_050_807_568_877_2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer weights in `1..=max_w`, random directions.
pub fn random_instance(rng: &mut ChaCha8Rng, t: usize, max_w: u32, f: f64, m: f64) -> Instance {
    let packets: Vec<(Direction, f64)> = (0..t)
        .map(|_| {
            let d = if rng.gen_bool(0.5) { Direction::LeftToRight } else { Direction::RightToLeft };
            (d, rng.gen_range(1..=max_w) as f64)
        })
        .collect();
    Instance::new(f, m, packets).unwrap()
}

/// Skewed direction mix, which drains one side and forces windows.
pub fn skewed_instance(rng: &mut ChaCha8Rng, t: usize, max_w: u32, f: f64, m: f64, p_right: f64) -> Instance {
    let packets: Vec<(Direction, f64)> = (0..t)
        .map(|_| {
            let d = if rng.gen_bool(p_right) { Direction::LeftToRight } else { Direction::RightToLeft };
            (d, rng.gen_range(1..=max_w) as f64)
        })
        .collect();
    Instance::new(f, m, packets).unwrap()
}

fn signed(instance: &Instance) -> Vec<f64> {
    instance.packets().iter().map(|p| if p.direction == Direction::LeftToRight { p.weight } else { -p.weight }).collect()
}

fn reject_costs(instance: &Instance) -> Vec<f64> {
    instance.packets().iter().map(|p| instance.f() * p.weight + instance.m()).collect()
}

/// Capacity needed by the accept mask: range of the accepted prefix sums.
fn mask_capacity(signed: &[f64], mask: u32) -> f64 {
    let (mut s, mut hi, mut lo) = (0.0f64, 0.0f64, 0.0f64);
    for (k, w) in signed.iter().enumerate() {
        if mask >> k & 1 == 1 {
            s += w;
            hi = hi.max(s);
            lo = lo.min(s);
        }
    }
    hi - lo
}

fn mask_rejection(costs: &[f64], mask: u32) -> f64 {
    costs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 0).map(|(_, c)| c).sum()
}

/// Optimum total by plain bitmask enumeration.
pub fn brute_opt(instance: &Instance) -> f64 {
    let (s, c) = (signed(instance), reject_costs(instance));
    (0..1u32 << instance.len())
        .map(|mask| mask_capacity(&s, mask) + mask_rejection(&c, mask))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum rejection cost over accept masks fitting capacity `cap`.
pub fn brute_opt_fixed(instance: &Instance, cap: f64) -> f64 {
    let (s, c) = (signed(instance), reject_costs(instance));
    (0..1u32 << instance.len())
        .filter(|&mask| mask_capacity(&s, mask) <= cap + 1e-9)
        .map(|mask| mask_rejection(&c, mask))
        .fold(f64::INFINITY, f64::min)
}

/// Capacities at which some accept mask becomes feasible.
pub fn brute_capacities(instance: &Instance) -> Vec<f64> {
    let s = signed(instance);
    let mut caps: Vec<f64> = (0..1u32 << instance.len()).map(|mask| mask_capacity(&s, mask)).collect();
    caps.sort_by(f64::total_cmp);
    caps.dedup();
    caps
}

/// Solves `a x = b` (square) by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let factor = a[r][col] / a[col][col];
                if factor != 0.0 {
                    for c in col..n {
                        a[r][c] -= factor * a[col][c];
                    }
                    b[r] -= factor * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Optimum of the fixed-capacity LP by enumerating all vertices of the
/// polytope in `(y_1..y_t, S_L0)` space. Only for tiny `t`.
pub fn lp_by_vertices(instance: &Instance, cap: f64) -> f64 {
    let t = instance.len();
    let n = t + 1;
    let x: Vec<f64> = instance.weights().collect();
    let s = signed(instance);
    // Rows `a . v <= b`.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        rows.push((a.clone(), 0.0));
        a[j] = 1.0;
        rows.push((a, if j < t { x[j] } else { cap }));
    }
    for i in 0..t {
        // left_i = S_L0 - sum_{k<=i} sign_k y_k in [0, cap]
        let mut a = vec![0.0; n];
        a[t] = 1.0;
        for k in 0..=i {
            a[k] = -s[k].signum();
        }
        rows.push((a.iter().map(|v| -v).collect(), 0.0));
        rows.push((a, cap));
    }
    let cost = |v: &[f64]| -> f64 {
        (0..t)
            .map(|i| {
                let gap = x[i] - v[i];
                instance.f() * gap + instance.m() * gap / x[i]
            })
            .sum()
    };
    let mut best = f64::INFINITY;
    let r = rows.len();
    let mut pick = (0..n).collect::<Vec<_>>();
    loop {
        let a: Vec<Vec<f64>> = pick.iter().map(|&k| rows[k].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&k| rows[k].1).collect();
        if let Some(v) = solve_square(a, b) {
            let feasible = rows.iter().all(|(a, b)| a.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-7);
            if feasible {
                best = best.min(cost(&v));
            }
        }
        // Next combination of n rows out of r.
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if pick[k] < r - n + k {
                pick[k] += 1;
                for j in k + 1..n {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Window scan written directly from the pseudocode, on the sender's
/// reserve. Returns `(accept, reject, undecided, r, end)`.
pub fn simulate_divide(
    instance: &Instance,
    y: &[f64],
    cap: f64,
    r_start: f64,
    i: usize,
) -> (Vec<usize>, Vec<usize>, Vec<usize>, f64, usize) {
    let little = (3.0 - 3f64.sqrt()) / 2.0;
    let p = instance.packets();
    let sender = p[i].direction;
    let h = HIBU * cap / 2.0;
    let mut r = r_start - (p[i].weight - y[i]);
    let (mut acc, mut rej, mut und) = (vec![], vec![], vec![i]);
    let mut j = i;
    while 0.0 <= r && r < h && j < p.len() - 1 {
        j += 1;
        let frac = y[j] / p[j].weight;
        if p[j].direction != sender {
            r += p[j].weight - y[j];
            acc.push(j);
        } else if frac >= little - 1e-9 || y[j] >= p[j].weight - 1e-9 {
            r -= p[j].weight - y[j];
            und.push(j);
        } else {
            r += y[j];
            rej.push(j);
        }
    }
    (acc, rej, und, r, j)
}
