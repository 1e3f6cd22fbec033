//! Solver components checked against the independent references in
//! `common`.

mod common;

use common::*;
use linkselect::approx::{divide, Constants};
use linkselect::lp_bound::{fractional_from, preprocess_oversized, solve_full_lp_objective, solve_lp};
use linkselect::model::{Direction::*, Instance};
use linkselect::oracle::{exact_opt, exact_opt_fixed_capacity};
use rand::Rng;

#[test]
fn exact_matches_bitmask_enumeration() {
    let mut r = rng(11);
    for k in 0..150 {
        let t = r.gen_range(0..=10);
        let f = [0.25, 1.0, 4.0][k % 3];
        let m = [0.0, 1.0][k % 2];
        let i = random_instance(&mut r, t, 20, f, m);
        let e = exact_opt(&i, 20).unwrap();
        assert!((e.total - brute_opt(&i)).abs() < 1e-9, "{}", i.to_text());
        assert!((e.total - e.capacity_cost - e.rejection_cost).abs() < 1e-12);
        assert!(linkselect::model::replay(&i, e.capacity_cost, e.initial_left, &e.decisions).is_ok());
    }
}

#[test]
fn exact_fixed_capacity_matches_enumeration() {
    let mut r = rng(12);
    for _ in 0..60 {
        let t = r.gen_range(0..=9);
        let i = random_instance(&mut r, t, 12, 1.0, 0.5);
        for cap in brute_capacities(&i) {
            let (opt_r, _) = exact_opt_fixed_capacity(&i, cap, 20).unwrap();
            assert!((opt_r - brute_opt_fixed(&i, cap)).abs() < 1e-9);
        }
    }
}

#[test]
fn exact_is_min_over_subset_capacities() {
    let mut r = rng(13);
    for _ in 0..40 {
        let t = r.gen_range(1..=8);
        let i = random_instance(&mut r, t, 10, 0.5, 1.0);
        let direct = exact_opt(&i, 20).unwrap().total;
        let via_fixed = brute_capacities(&i)
            .into_iter()
            .map(|cap| cap + exact_opt_fixed_capacity(&i, cap, 20).unwrap().0)
            .fold(f64::INFINITY, f64::min);
        assert!((direct - via_fixed).abs() < 1e-9);
    }
}

#[test]
fn lp_matches_vertex_enumeration() {
    let mut r = rng(14);
    for k in 0..120 {
        let t = r.gen_range(0..=4);
        let i = random_instance(&mut r, t, 9, [0.25, 1.0, 4.0][k % 3], [0.0, 1.0][k % 2]);
        let hi = linkselect::model::m_max(&i).max(1.0);
        let cap = r.gen_range(0.0..=hi * 1.2);
        let pre = preprocess_oversized(&i, cap);
        let lp = solve_lp(&pre.sub_instance, cap).unwrap();
        let reference = lp_by_vertices(&pre.sub_instance, cap);
        assert!((lp.objective - reference).abs() < 1e-7, "{} M={cap}: {} vs {reference}", i.to_text(), lp.objective);
    }
}

#[test]
fn reduced_and_full_forms_agree() {
    let mut r = rng(15);
    for _ in 0..60 {
        let t = r.gen_range(0..=9);
        let i = random_instance(&mut r, t, 15, 1.0, 0.3);
        let cap = r.gen_range(1.0..=20.0);
        let pre = preprocess_oversized(&i, cap);
        let reduced = solve_lp(&pre.sub_instance, cap).unwrap().objective;
        let full = solve_full_lp_objective(&pre.sub_instance, cap).unwrap();
        assert!((reduced - full).abs() < 1e-7);
    }
}

#[test]
fn lp_below_fixed_capacity_optimum() {
    let mut r = rng(16);
    for _ in 0..80 {
        let t = r.gen_range(0..=9);
        let i = random_instance(&mut r, t, 20, 1.0, 1.0);
        let cap = r.gen_range(0.0..=40.0);
        let pre = preprocess_oversized(&i, cap);
        let lb = solve_lp(&pre.sub_instance, cap).unwrap().objective + pre.forced_cost;
        assert!(lb <= brute_opt_fixed(&i, cap) + 1e-7);
    }
}

#[test]
fn divide_matches_step_simulator() {
    let mut r = rng(17);
    let c = Constants::STANDARD;
    let mut checked = 0;
    while checked < 300 {
        let t = r.gen_range(1..=10);
        let i = random_instance(&mut r, t, 10, 1.0, 0.0);
        let cap = 10.0;
        // Random trace-feasible y.
        let mut left: f64 = r.gen_range(0.0..=cap);
        let start = left;
        let mut y = Vec::new();
        for p in i.packets() {
            let room = if p.direction == LeftToRight { left } else { cap - left };
            let v = if r.gen_bool(0.3) { room.min(p.weight) } else { r.gen_range(0.0..=room.min(p.weight)) };
            left -= p.direction.sign() * v;
            y.push(v);
        }
        let frac = fractional_from(&i, cap, y.clone(), start);
        let Some(s) = (0..t).find(|&k| y[k] / i.packets()[k].weight >= c.little_threshold) else {
            continue;
        };
        let r0 = r.gen_range(0.0..=c.hibu * cap);
        let w = divide(&i, cap, &frac, r0, s).unwrap();
        let (acc, rej, und, rr, end) = simulate_divide(&i, &y, cap, r0, s);
        assert_eq!((w.accept_set, w.reject_set, w.undecided, w.end_index), (acc, rej, und, end));
        assert!((w.r_after - rr).abs() < 1e-9);
        checked += 1;
    }
}

#[test]
fn divide_hand_example_agrees_with_simulator() {
    let i = Instance::new(1.0, 0.0, [(LeftToRight, 1.0), (RightToLeft, 0.8)]).unwrap();
    let y = vec![0.7, 0.5];
    let frac = fractional_from(&i, 1.0, y.clone(), 1.0);
    let w = divide(&i, 1.0, &frac, 0.4, 0).unwrap();
    let (acc, _, und, r, end) = simulate_divide(&i, &y, 1.0, 0.4, 0);
    assert_eq!((acc, und, end), (vec![1], vec![0], 1));
    assert!((r - 0.4).abs() < 1e-12 && (w.r_after - 0.4).abs() < 1e-12);
}
