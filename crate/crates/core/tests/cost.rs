mod common;

use common::*;
use lru_core::cost::{approx_eq, check_partition};
use lru_core::{design_cost, fixture, is_connected_design, lru_cost, Error, SuccessorSets, VertexSet};
use rand::Rng;

#[test]
fn palm_rest_cost() {
    let inst = fixture("laptop").unwrap();
    let h = SuccessorSets::compute(&inst);
    let lru = lru_cost(&inst, &h, set(&inst, &["E"])).unwrap();
    assert_eq!(lru.removal, 325.0);
    assert_eq!(lru.purchase, 45.0);
    assert!(approx_eq(lru.omega, 0.37, 1e-12));
}

#[test]
fn whole_system_has_no_removal_cost() {
    let inst = fixture("laptop").unwrap();
    let h = SuccessorSets::compute(&inst);
    let lru = lru_cost(&inst, &h, inst.all_vertices()).unwrap();
    assert_eq!(lru.gamma.count_ones(..), 0);
    let total_cost: f64 = inst.vertices().iter().map(|v| v.cost).sum();
    let total_rate: f64 = inst.vertices().iter().map(|v| v.rate).sum();
    assert!(approx_eq(lru.omega, total_rate * total_cost, 1e-12));
}

#[test]
fn two_vertex_path_costs() {
    let inst = two_vertex_path();
    let h = SuccessorSets::compute(&inst);
    let one = VertexSet::singleton(0);
    let two = VertexSet::singleton(1);
    assert!(approx_eq(lru_cost(&inst, &h, one).unwrap().omega, 1.1, 1e-12));
    assert!(approx_eq(design_cost(&inst, &h, &[one, two]).unwrap().pi, 2.2, 1e-12));
    assert!(approx_eq(design_cost(&inst, &h, &[one.union(two)]).unwrap().pi, 0.4, 1e-12));
    assert!(matches!(design_cost(&inst, &h, &[one.union(two), two]), Err(Error::NotAPartition(_))));
    assert!(matches!(design_cost(&inst, &h, &[one]), Err(Error::NotAPartition(_))));
    assert!(matches!(lru_cost(&inst, &h, VertexSet::EMPTY), Err(Error::EmptyLru)));
}

#[test]
fn singleton_design_on_laptop() {
    let inst = fixture("laptop").unwrap();
    let h = SuccessorSets::compute(&inst);
    let singles: Vec<VertexSet> = (0..13).map(VertexSet::singleton).collect();
    let d = design_cost(&inst, &h, &singles).unwrap();
    let sum: f64 = singles.iter().map(|&q| lru_cost(&inst, &h, q).unwrap().omega).sum();
    assert!(approx_eq(d.pi, sum, 1e-12));
    assert!(is_connected_design(&inst, &singles));
}

#[test]
fn connectivity_of_designs() {
    let inst = fixture("laptop").unwrap();
    let mut s = vec![set(&inst, &["A", "L"])];
    s.extend(["B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "M"].iter().map(|l| set(&inst, &[l])));
    assert!(is_connected_design(&inst, &s));
    let mut s = vec![set(&inst, &["A", "K"])];
    s.extend(["B", "C", "D", "E", "F", "G", "H", "I", "J", "L", "M"].iter().map(|l| set(&inst, &[l])));
    assert!(!is_connected_design(&inst, &s));
}

#[test]
fn design_json_round_trip() {
    let inst = fixture("laptop").unwrap();
    let h = SuccessorSets::compute(&inst);
    let s = vec![set(&inst, &["A", "L", "M"]), set(&inst, &["B", "C", "D", "E", "F", "G", "H", "I", "J", "K"])];
    let d = design_cost(&inst, &h, &s).unwrap();
    let json = serde_json::to_string(&d.to_json(&inst)).unwrap();
    let back: lru_core::DesignJson = serde_json::from_str(&json).unwrap();
    assert_eq!(back.sets(&inst).unwrap(), d.sets());
    assert_eq!(back.per_lru.len(), 2);
}

fn random_partition(r: &mut impl Rng, n: usize) -> Vec<VertexSet> {
    let k = r.random_range(1..=n);
    let mut blocks = vec![VertexSet::EMPTY; k];
    for v in 0..n {
        blocks[r.random_range(0..k)].insert(v);
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

#[test]
fn splitting_disconnected_lrus_lowers_cost() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let inst = random_instance(seed, 6 + seed as usize % 8);
        let h = SuccessorSets::compute(&inst);
        let mut r = rng(seed);
        let s = random_partition(&mut r, inst.num_vertices());
        for &q in &s {
            assert!(rel_close(lru_cost(&inst, &h, q).unwrap().omega, naive_omega(&inst, q), 1e-12));
        }
        if is_connected_design(&inst, &s) {
            continue;
        }
        let split: Vec<VertexSet> = s.iter().flat_map(|&q| inst.components_of(q)).collect();
        assert!(check_partition(&inst, &split).is_ok());
        let before = design_cost(&inst, &h, &s).unwrap().pi;
        let after = design_cost(&inst, &h, &split).unwrap().pi;
        assert!(after < before, "seed {seed}: {after} !< {before}");
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn costs_scale_linearly() {
    for seed in 0..30u64 {
        let inst = random_instance(seed, 8);
        let h = SuccessorSets::compute(&inst);
        let c = 3.5;
        let scaled = {
            let mut raw = inst.to_raw();
            raw.vertices.iter_mut().for_each(|v| v.cost *= c);
            raw.edges.iter_mut().for_each(|e| e.w *= c);
            lru_core::SystemInstance::validate(&raw).unwrap()
        };
        let mut r = rng(seed);
        let s = random_partition(&mut r, 8);
        let a = design_cost(&inst, &h, &s).unwrap().pi;
        let b = design_cost(&scaled, &h, &s).unwrap().pi;
        assert!(approx_eq(b, c * a, 1e-9));
    }
}
