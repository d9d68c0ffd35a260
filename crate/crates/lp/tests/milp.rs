mod common;

use common::rng;
use lru_lp::{solve_milp, MilpModel, MilpOptions, MilpStatus, Sense};
use rand::Rng;
use std::time::Duration;

fn exact() -> MilpOptions {
    MilpOptions { rel_gap: 1e-9, ..Default::default() }
}

#[test]
fn integral_relaxation_solves_at_root() {
    let mut m = MilpModel::new();
    let x = m.add_binary(1.0);
    let y = m.add_binary(2.0);
    m.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 1.0);
    let s = solve_milp(&m, &exact()).unwrap();
    assert_eq!(s.status, MilpStatus::Optimal);
    assert_eq!(s.nodes, 1);
    assert_eq!(s.x.unwrap(), vec![1.0, 0.0]);
}

#[test]
fn knapsack_of_two() {
    let mut m = MilpModel::new();
    let x = m.add_binary(-1.0);
    let y = m.add_binary(-1.0);
    m.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
    let s = solve_milp(&m, &exact()).unwrap();
    assert_eq!(s.status, MilpStatus::Optimal);
    assert!((s.objective.unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn mccormick_pricing_on_two_vertex_path() {
    // Vertices 1,2 joined by one edge (w=10), λ=0.1 and ℓ=1 each, duals 1.1.
    let (lam, ell, w, r) = (0.1, 1.0, 10.0, 1.1);
    let mut m = MilpModel::new();
    let g = [m.add_binary(-r), m.add_binary(-r)];
    let k = m.add_binary(0.0);
    m.add_row(vec![(g[0], 1.0), (g[1], -1.0), (k, -1.0)], Sense::Le, 0.0);
    m.add_row(vec![(g[1], 1.0), (g[0], -1.0), (k, -1.0)], Sense::Le, 0.0);
    m.add_row(vec![(g[0], 1.0), (g[1], 1.0)], Sense::Ge, 1.0);
    let product = |m: &mut MilpModel, a: usize, b: usize, c: f64| {
        let p = m.add_binary(c);
        m.add_lazy_row(vec![(p, 1.0), (a, -1.0)], Sense::Le, 0.0);
        m.add_lazy_row(vec![(p, 1.0), (b, -1.0)], Sense::Le, 0.0);
        m.add_lazy_row(vec![(p, 1.0), (a, -1.0), (b, -1.0)], Sense::Ge, -1.0);
    };
    for &v in &g {
        product(&mut m, k, v, lam * w);
    }
    for &u in &g {
        for &v in &g {
            product(&mut m, u, v, ell * lam);
        }
    }
    for lazy in [true, false] {
        let s = solve_milp(&m, &MilpOptions { lazy_rows: lazy, ..exact() }).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        let x = s.x.unwrap();
        assert_eq!((x[g[0]], x[g[1]]), (1.0, 1.0));
        assert!((s.objective.unwrap() + 1.8).abs() < 1e-9);
    }
}

#[test]
fn infeasible_binary_program() {
    let mut m = MilpModel::new();
    let x = m.add_binary(1.0);
    let y = m.add_binary(1.0);
    m.add_row(vec![(x, 2.0), (y, 2.0)], Sense::Eq, 1.0);
    let s = solve_milp(&m, &exact()).unwrap();
    assert_eq!(s.status, MilpStatus::Infeasible);
    assert!(s.x.is_none());
}

fn brute_force(m: &MilpModel) -> Option<f64> {
    let n = m.num_vars();
    let mut best: Option<f64> = None;
    let mut x = vec![0.0; n];
    for mask in 0u32..(1 << n) {
        for (j, v) in x.iter_mut().enumerate() {
            *v = ((mask >> j) & 1) as f64;
        }
        if m.lp.rows.iter().all(|r| r.violation(&x) <= 1e-9) {
            let o = m.lp.objective(&x);
            if best.is_none_or(|b| o < b) {
                best = Some(o);
            }
        }
    }
    best
}

fn random_binary_program(r: &mut impl Rng, n: usize) -> MilpModel {
    let mut m = MilpModel::new();
    for _ in 0..n {
        m.add_binary(r.random_range(-10..=10) as f64);
    }
    for _ in 0..r.random_range(1..=n) {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if r.random_bool(0.5) {
                coeffs.push((j, r.random_range(-4..=6) as f64));
            }
        }
        let sense = match r.random_range(0..6) {
            0 => Sense::Eq,
            1 | 2 => Sense::Ge,
            _ => Sense::Le,
        };
        let rhs = r.random_range(-2..=6) as f64;
        if r.random_bool(0.5) {
            m.add_lazy_row(coeffs, sense, rhs);
        } else {
            m.add_row(coeffs, sense, rhs);
        }
    }
    m
}

#[test]
fn matches_exhaustive_enumeration() {
    let mut r = rng(5);
    let mut feasible = 0;
    for case in 0..400 {
        let n = r.random_range(1..=12);
        let m = random_binary_program(&mut r, n);
        let expect = brute_force(&m);
        for lazy in [true, false] {
            let s = solve_milp(&m, &MilpOptions { lazy_rows: lazy, ..exact() }).unwrap();
            match expect {
                None => assert_eq!(s.status, MilpStatus::Infeasible, "case {case}"),
                Some(v) => {
                    assert_eq!(s.status, MilpStatus::Optimal, "case {case}");
                    assert!((s.objective.unwrap() - v).abs() < 1e-9, "case {case}: {:?} vs {v}", s.objective);
                    let x = s.x.unwrap();
                    assert!(m.lp.max_violation(&x) <= 1e-9);
                    assert!(x.iter().all(|&v| v == 0.0 || v == 1.0));
                    assert!(s.objective.unwrap() >= s.bound - 1e-9);
                }
            }
        }
        feasible += expect.is_some() as usize;
    }
    assert!(feasible > 100);
}

#[test]
fn twenty_binaries_match_enumeration() {
    let mut r = rng(9);
    for _ in 0..3 {
        let m = random_binary_program(&mut r, 20);
        let s = solve_milp(&m, &exact()).unwrap();
        match brute_force(&m) {
            None => assert_eq!(s.status, MilpStatus::Infeasible),
            Some(v) => assert!((s.objective.unwrap() - v).abs() < 1e-9),
        }
    }
}

#[test]
fn deterministic_and_limits_reported() {
    let mut r = rng(13);
    let m = random_binary_program(&mut r, 16);
    let a = solve_milp(&m, &exact()).unwrap();
    let b = solve_milp(&m, &exact()).unwrap();
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.x, b.x);

    let limited = solve_milp(&m, &MilpOptions { node_limit: Some(1), ..exact() }).unwrap();
    assert!(limited.nodes <= 1);
    if limited.status == MilpStatus::LimitReached {
        if let Some(o) = limited.objective {
            assert!(o >= limited.bound - 1e-9);
        }
    }
    let timed = solve_milp(&m, &MilpOptions { time_limit: Some(Duration::ZERO), ..exact() }).unwrap();
    assert_eq!(timed.status, MilpStatus::LimitReached);
    assert_eq!(timed.nodes, 0);
}

#[test]
fn general_integers_and_continuous_vars() {
    // min -x - 2y  s.t. 2x + 3y <= 12.5, x - y <= 1.5, x integer in [0,10], y continuous >= 0
    let mut m = MilpModel::new();
    let x = m.add_var(-1.0, 0.0, 10.0, true);
    let y = m.add_var(-2.0, 0.0, f64::INFINITY, false);
    m.add_row(vec![(x, 2.0), (y, 3.0)], Sense::Le, 12.5);
    m.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.5);
    let s = solve_milp(&m, &exact()).unwrap();
    assert_eq!(s.status, MilpStatus::Optimal);
    let v = s.x.unwrap();
    assert_eq!(v[x], v[x].round());
    // x = 0 gives y = 12.5/3 and objective -8.333..., the best over all integer x.
    let best = (0..=10)
        .map(|xi| {
            let xi = xi as f64;
            let y = (12.5 - 2.0 * xi) / 3.0;
            if y >= 0.0 && xi - y <= 1.5 { -xi - 2.0 * y } else { f64::INFINITY }
        })
        .fold(f64::INFINITY, f64::min);
    assert!((s.objective.unwrap() - best).abs() < 1e-9);
}
