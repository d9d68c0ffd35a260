#![allow(dead_code)]

use lru_lp::{LpModel, Sense};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Random LP with box bounds and rows built around a known feasible point,
/// so it is always feasible and bounded.
pub fn random_boxed_lp(r: &mut impl Rng, n: usize, m: usize) -> LpModel {
    let mut lp = LpModel::new();
    let mut point = Vec::new();
    for _ in 0..n {
        let lo = r.random_range(-3..=1) as f64;
        let hi = lo + r.random_range(0..=4) as f64;
        let c = r.random_range(-5..=5) as f64;
        lp.add_var(c, lo, hi);
        point.push(if hi > lo { r.random_range(lo..=hi) } else { lo });
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if r.random_bool(0.6) {
                coeffs.push((j, r.random_range(-3..=3) as f64));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
        let (sense, rhs) = match r.random_range(0..3) {
            0 => (Sense::Eq, act),
            1 => (Sense::Le, act + r.random_range(0..3) as f64),
            _ => (Sense::Ge, act - r.random_range(0..3) as f64),
        };
        lp.add_row(coeffs, sense, rhs);
    }
    lp
}

/// Check an optimality certificate: primal feasibility, dual sign conditions,
/// complementary slackness and strong duality.
pub fn assert_kkt(lp: &LpModel, x: &[f64], y: &[f64], obj: f64) {
    assert!(lp.max_violation(x) <= 1e-9, "primal violation {}", lp.max_violation(x));
    let n = lp.num_vars();
    let mut d = lp.cost.clone();
    for (i, r) in lp.rows.iter().enumerate() {
        for &(j, a) in &r.coeffs {
            d[j] -= y[i] * a;
        }
        let slack = r.rhs - r.activity(x);
        match r.sense {
            Sense::Le => assert!(y[i] <= 1e-7, "Le row dual {}", y[i]),
            Sense::Ge => assert!(y[i] >= -1e-7, "Ge row dual {}", y[i]),
            Sense::Eq => {}
        }
        assert!((y[i] * slack).abs() <= 1e-7, "row {i} complementary slackness");
    }
    let mut dual_obj: f64 = lp.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
    for j in 0..n {
        let at_lo = (x[j] - lp.lower[j]).abs() <= 1e-9;
        let at_hi = (x[j] - lp.upper[j]).abs() <= 1e-9;
        if !at_lo && !at_hi {
            assert!(d[j].abs() <= 1e-7, "interior var {j} has reduced cost {}", d[j]);
        } else if at_lo && !at_hi {
            assert!(d[j] >= -1e-7, "var {j} at lower with reduced cost {}", d[j]);
        } else if at_hi && !at_lo {
            assert!(d[j] <= 1e-7, "var {j} at upper with reduced cost {}", d[j]);
        }
        dual_obj += d[j] * x[j];
    }
    let pobj = lp.objective(x);
    assert!((pobj - obj).abs() <= 1e-9 * (1.0 + obj.abs()));
    assert!((pobj - dual_obj).abs() <= 1e-7 * (1.0 + pobj.abs()), "duality gap {pobj} vs {dual_obj}");
}

pub fn strictly_between(lp: &LpModel, x: &[f64]) -> usize {
    (0..lp.num_vars())
        .filter(|&j| x[j] > lp.lower[j] + 1e-9 && x[j] < lp.upper[j] - 1e-9)
        .count()
}
