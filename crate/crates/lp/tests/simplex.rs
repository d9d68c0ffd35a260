mod common;

use common::{assert_kkt, random_boxed_lp, rng, strictly_between};
use lru_lp::{solve_lp, LpError, LpModel, LpStatus, Sense, Simplex};
use rand::Rng;

const INF: f64 = f64::INFINITY;

#[test]
fn single_equality() {
    let mut lp = LpModel::new();
    let x = lp.add_var(1.0, 0.0, 2.0);
    lp.add_row(vec![(x, 1.0)], Sense::Eq, 1.0);
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.x[0] - 1.0).abs() < 1e-12);
    assert!((s.duals[0] - 1.0).abs() < 1e-12);
    assert!((s.objective - 1.0).abs() < 1e-12);
}

#[test]
fn returns_a_vertex_not_a_midpoint() {
    let mut lp = LpModel::new();
    let x = lp.add_var(-1.0, 0.0, 1.0);
    let y = lp.add_var(-1.0, 0.0, 1.0);
    lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective + 1.0).abs() < 1e-12);
    let v = (s.x[0], s.x[1]);
    assert!(v == (1.0, 0.0) || v == (0.0, 1.0), "got {v:?}");
}

#[test]
fn two_vertex_restricted_master() {
    // Two-vertex path: singletons cost 1.1 each, the pair costs 0.4.
    let mut lp = LpModel::new();
    let a = lp.add_var(1.1, 0.0, 1.0);
    let b = lp.add_var(1.1, 0.0, 1.0);
    let ab = lp.add_var(0.4, 0.0, 1.0);
    lp.add_row(vec![(a, 1.0), (ab, 1.0)], Sense::Eq, 1.0);
    lp.add_row(vec![(b, 1.0), (ab, 1.0)], Sense::Eq, 1.0);
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.x[ab] - 1.0).abs() < 1e-12);
    assert!((s.objective - 0.4).abs() < 1e-12);
    assert!((s.duals.iter().sum::<f64>() - 0.4).abs() < 1e-12);
    assert_kkt(&lp, &s.x, &s.duals, s.objective);
}

#[test]
fn detects_infeasible() {
    let mut lp = LpModel::new();
    let x = lp.add_var(1.0, 0.0, 1.0);
    let y = lp.add_var(1.0, 0.0, 1.0);
    lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);

    let mut lp = LpModel::new();
    let x = lp.add_var(0.0, -INF, INF);
    lp.add_row(vec![(x, 1.0)], Sense::Ge, 2.0);
    lp.add_row(vec![(x, 1.0)], Sense::Le, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn detects_unbounded() {
    let mut lp = LpModel::new();
    let x = lp.add_var(-1.0, 0.0, INF);
    let y = lp.add_var(0.0, 0.0, INF);
    lp.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);

    let mut lp = LpModel::new();
    lp.add_var(1.0, -INF, INF);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn free_variables_and_mixed_senses() {
    // min x + 2y  s.t. x - y >= -1, x + y = 3, y free, x <= 10
    let mut lp = LpModel::new();
    let x = lp.add_var(1.0, -INF, 10.0);
    let y = lp.add_var(2.0, -INF, INF);
    lp.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Le, 4.0);
    lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 3.0);
    let s = solve_lp(&lp).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    // x - y <= 4 with x + y = 3 -> x <= 3.5; objective 3 + y = 3 + (3 - x) minimised at x = 3.5
    assert!((s.x[0] - 3.5).abs() < 1e-9);
    assert!((s.objective - 2.5).abs() < 1e-9);
    assert_kkt(&lp, &s.x, &s.duals, s.objective);
}

#[test]
fn rejects_malformed_models() {
    let mut lp = LpModel::new();
    lp.add_var(1.0, 2.0, 1.0);
    assert!(matches!(solve_lp(&lp), Err(LpError::InvalidModel(_))));
    let mut lp = LpModel::new();
    lp.add_var(f64::NAN, 0.0, 1.0);
    assert!(matches!(solve_lp(&lp), Err(LpError::InvalidModel(_))));
    let mut lp = LpModel::new();
    lp.add_var(1.0, 0.0, 1.0);
    lp.add_row(vec![(3, 1.0)], Sense::Eq, 1.0);
    assert!(matches!(solve_lp(&lp), Err(LpError::InvalidModel(_))));
}

#[test]
fn random_boxed_lps_satisfy_optimality_certificate() {
    let mut r = rng(7);
    for case in 0..600 {
        let n = r.random_range(1..=9);
        let m = r.random_range(0..=7);
        let lp = random_boxed_lp(&mut r, n, m);
        let s = solve_lp(&lp).unwrap_or_else(|e| panic!("case {case}: {e}"));
        assert_eq!(s.status, LpStatus::Optimal, "case {case}");
        assert_kkt(&lp, &s.x, &s.duals, s.objective);
        assert!(strictly_between(&lp, &s.x) <= lp.num_rows(), "case {case}: not basic");
    }
}

#[test]
fn degenerate_set_partitioning_lps() {
    // Many identical-cost columns covering the same rows: heavy degeneracy.
    let mut r = rng(11);
    for _ in 0..100 {
        let rows = r.random_range(2..=8);
        let mut lp = LpModel::new();
        let mut row_coeffs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for i in 0..rows {
            let j = lp.add_var(1.0, 0.0, 1.0);
            row_coeffs[i].push((j, 1.0));
        }
        for _ in 0..r.random_range(5..30) {
            let mut members: Vec<usize> = (0..rows).filter(|_| r.random_bool(0.4)).collect();
            if members.is_empty() {
                members.push(0);
            }
            let j = lp.add_var(members.len() as f64 * 0.5 + r.random_range(0..2) as f64 * 0.25, 0.0, 1.0);
            for i in members {
                row_coeffs[i].push((j, 1.0));
            }
        }
        for c in row_coeffs {
            lp.add_row(c, Sense::Eq, 1.0);
        }
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_kkt(&lp, &s.x, &s.duals, s.objective);
    }
}

fn cold(lp: &LpModel) -> f64 {
    solve_lp(lp).unwrap().objective
}

#[test]
fn incremental_columns_match_cold_solves() {
    let mut r = rng(21);
    for _ in 0..150 {
        let n = r.random_range(1..=5);
        let m = r.random_range(1..=5);
        let mut lp = random_boxed_lp(&mut r, n, m);
        let mut s = Simplex::new(&lp).unwrap();
        assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
        for _ in 0..4 {
            let c = r.random_range(-5..=5) as f64;
            let hi = r.random_range(0..=3) as f64;
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for i in 0..m {
                if r.random_bool(0.5) {
                    coeffs.push((i, r.random_range(-2..=2) as f64));
                }
            }
            let j = lp.add_var(c, 0.0, hi);
            for &(i, a) in &coeffs {
                lp.rows[i].coeffs.push((j, a));
            }
            assert_eq!(s.add_col(c, 0.0, hi, &coeffs).unwrap(), j);
            assert_eq!(s.solve().unwrap(), LpStatus::Optimal);
            assert!((s.objective() - cold(&lp)).abs() < 1e-8);
            assert_kkt(&lp, &s.values(), &s.duals(), s.objective());
        }
    }
}

#[test]
fn incremental_rows_and_bounds_match_cold_solves() {
    let mut r = rng(33);
    let mut seen_infeasible = false;
    for case in 0..200 {
        let n = r.random_range(2..=7);
        let m = r.random_range(0..=4);
        let mut lp = random_boxed_lp(&mut r, n, m);
        let mut s = Simplex::new(&lp).unwrap();
        s.solve().unwrap();
        for _ in 0..5 {
            match r.random_range(0..3) {
                0 => {
                    let mut coeffs: Vec<(usize, f64)> = Vec::new();
                    for j in 0..n {
                        if r.random_bool(0.5) {
                            coeffs.push((j, r.random_range(-2..=2) as f64));
                        }
                    }
                    let rhs = r.random_range(-3..=3) as f64;
                    let sense = if r.random_bool(0.5) { Sense::Le } else { Sense::Ge };
                    lp.add_row(coeffs.clone(), sense, rhs);
                    s.add_row(&coeffs, sense, rhs).unwrap();
                }
                1 => {
                    let j = r.random_range(0..n);
                    let (lo, hi) = (lp.lower[j], lp.upper[j]);
                    let mid = ((lo + hi) / 2.0).floor();
                    let (l, u) = if r.random_bool(0.5) { (lo, mid.max(lo)) } else { (mid.max(lo), hi) };
                    lp.lower[j] = l;
                    lp.upper[j] = u;
                    s.set_bounds(j, l, u).unwrap();
                }
                _ => {
                    let removable: Vec<usize> = (0..lp.num_rows()).filter(|&i| s.row_is_removable(i)).collect();
                    if let Some(&i) = removable.first() {
                        lp.rows.remove(i);
                        s.remove_rows(&[i]).unwrap();
                    }
                }
            }
            let st = s.solve().unwrap();
            let c = solve_lp(&lp).unwrap();
            assert_eq!(st, c.status, "case {case}");
            if st == LpStatus::Optimal {
                assert!((s.objective() - c.objective).abs() < 1e-8, "case {case}");
                assert_kkt(&lp, &s.values(), &s.duals(), s.objective());
            } else {
                seen_infeasible = true;
            }
        }
    }
    assert!(seen_infeasible);
}

