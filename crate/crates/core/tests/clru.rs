mod common;

use common::{random_instance, rel_close, set, two_vertex_path};
use lru_core::clru::{build_clru_milp, failure_sets, relative_gap, replacement_cost, ClruMode};
use lru_core::oracle::oracle_optimal_design;
use lru_core::{clru_cost, fixture, solve_clru, Error, SuccessorSets};

#[test]
fn two_vertex_cover_costs() {
    let inst = two_vertex_path();
    let h = SuccessorSets::compute(&inst);
    let both = set(&inst, &["1", "2"]);
    let d = clru_cost(&inst, &h, &[(both, set(&inst, &["1"])), (set(&inst, &["2"]), set(&inst, &["2"]))]).unwrap();
    assert!(rel_close(d.pi, 1.3, 1e-12), "{}", d.pi);
    assert!(rel_close(d.lrus[0].omega, 0.2, 1e-12));

    for mode in [ClruMode::Exhaustive, ClruMode::FullPower, ClruMode::Decomposition, ClruMode::Milp] {
        let best = solve_clru(&inst, &h, mode, 8).unwrap();
        assert!(rel_close(best.pi, 0.4, 1e-9), "{mode:?}: {}", best.pi);
    }
}

#[test]
fn invalid_cover_designs() {
    let inst = two_vertex_path();
    let h = SuccessorSets::compute(&inst);
    let (a, b, ab) = (set(&inst, &["1"]), set(&inst, &["2"]), set(&inst, &["1", "2"]));
    assert!(matches!(clru_cost(&inst, &h, &[(a, ab)]), Err(Error::FailureOutsideReplacement)));
    assert!(matches!(clru_cost(&inst, &h, &[(ab, a)]), Err(Error::FailureSetsNotPartition(_))));
    assert!(matches!(clru_cost(&inst, &h, &[(ab, a), (ab, ab)]), Err(Error::FailureSetsNotPartition(_))));
    // overlapping replacement sets are fine
    assert!(clru_cost(&inst, &h, &[(ab, a), (ab, b)]).is_ok());
}

#[test]
fn modes_agree_on_random_instances() {
    for seed in 0..30 {
        let n = 3 + (seed as usize % 4);
        let inst = random_instance(seed, n);
        let h = SuccessorSets::compute(&inst);
        let ex = solve_clru(&inst, &h, ClruMode::Exhaustive, 8).unwrap();
        let fp = solve_clru(&inst, &h, ClruMode::FullPower, 8).unwrap();
        let dc = solve_clru(&inst, &h, ClruMode::Decomposition, 8).unwrap();
        assert!(rel_close(ex.pi, fp.pi, 1e-9), "seed {seed}: {} vs {}", ex.pi, fp.pi);
        assert!(rel_close(ex.pi, dc.pi, 1e-9), "seed {seed}: {} vs {}", ex.pi, dc.pi);
    }
}

#[test]
fn cover_program_matches_enumeration() {
    for seed in 0..8 {
        let inst = random_instance(100 + seed, 3 + seed as usize % 2);
        let h = SuccessorSets::compute(&inst);
        let milp = solve_clru(&inst, &h, ClruMode::Milp, 8).unwrap();
        let dc = solve_clru(&inst, &h, ClruMode::Decomposition, 8).unwrap();
        assert!(rel_close(milp.pi, dc.pi, 1e-6), "seed {seed}: {} vs {}", milp.pi, dc.pi);
    }
}

#[test]
fn encoding_layout_is_dense() {
    let inst = random_instance(7, 4);
    let h = SuccessorSets::compute(&inst);
    let enc = build_clru_milp(&inst, &h);
    let (n, m) = (enc.n, enc.m);
    assert_eq!(enc.model.num_vars(), 2 * n * n + n * m + n * m * n + n * n * n);
    assert_eq!(enc.beta(n - 1, n - 1, n - 1), enc.model.num_vars() - 1);
    assert_eq!(enc.alpha(0, 0, 0), enc.k(n - 1, m - 1) + 1);
}

#[test]
fn cover_never_costs_more_than_partition() {
    for seed in 0..20 {
        let inst = random_instance(200 + seed, 4 + seed as usize % 5);
        let h = SuccessorSets::compute(&inst);
        let cover = solve_clru(&inst, &h, ClruMode::Exhaustive, 8).unwrap();
        let part = oracle_optimal_design(&inst, &h, 13).unwrap();
        assert!(cover.pi <= part.pi * (1.0 + 1e-9), "seed {seed}");
        assert!(relative_gap(part.pi, cover.pi) >= -1e-9);
    }
}

#[test]
fn decomposition_uses_cheapest_replacement_per_part() {
    let inst = fixture("laptop").unwrap();
    let h = SuccessorSets::compute(&inst);
    let d = solve_clru(&inst, &h, ClruMode::Decomposition, 8).unwrap();
    assert_eq!(failure_sets(&d).iter().map(|f| f.len()).sum::<usize>(), inst.num_vertices());
    for l in &d.lrus {
        assert!(inst.is_connected_set(l.replacement));
        let c = replacement_cost(&inst, &h, l.replacement).unwrap();
        for v in l.failure.iter() {
            let alone = replacement_cost(&inst, &h, lru_core::VertexSet::singleton(v)).unwrap();
            assert!(c <= alone + 1e-9);
        }
    }
}

#[test]
fn size_limits() {
    let inst = fixture("laptop").unwrap();
    let h = SuccessorSets::compute(&inst);
    assert!(matches!(solve_clru(&inst, &h, ClruMode::Exhaustive, 8), Err(Error::InstanceTooLarge(_))));
    assert!(matches!(solve_clru(&inst, &h, ClruMode::FullPower, 20), Err(Error::InstanceTooLarge(_))));
}
