#![allow(dead_code)]

use std::collections::BTreeSet;

use lru_core::instance::{Edge, RawInstance, Vertex};
use lru_core::{generate, GeneratorConfig, SystemInstance, VertexSet};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Parts 1 and 2 joined by one edge of weight 10; rates 0.1, costs 1.
pub fn two_vertex_path() -> SystemInstance {
    let v = |l: &str| Vertex { label: l.into(), name: None, cost: 1.0, rate: 0.1 };
    SystemInstance::from_parts(vec![v("1"), v("2")], vec![Edge { u: 0, v: 1, w: 10.0 }], vec![], None).unwrap()
}

pub fn single_vertex() -> SystemInstance {
    let v = Vertex { label: "x".into(), name: None, cost: 7.0, rate: 0.3 };
    SystemInstance::from_parts(vec![v], vec![], vec![], None).unwrap()
}

/// Instance built from label lists; rates and costs all 1.
pub fn small(n: usize, edges: &[(usize, usize, f64)], arcs: &[(usize, usize)]) -> SystemInstance {
    let vertices = (0..n).map(|i| Vertex { label: (i + 1).to_string(), name: None, cost: 1.0, rate: 1.0 }).collect();
    let edges = edges.iter().map(|&(u, v, w)| Edge { u: u.min(v), v: u.max(v), w }).collect();
    SystemInstance::from_parts(vertices, edges, arcs.to_vec(), None).unwrap()
}

pub fn random_instance(seed: u64, n: usize) -> SystemInstance {
    let mut r = rng(seed ^ 0x5eed);
    let delta = r.random_range(2.0..=3.0f64).min((n as f64 - 1.0) / 2.0).max((n as f64 - 1.0) / n as f64);
    let mut delta_e: f64 = r.random_range(0.5..=1.5);
    let q = [0.1, 1.0, 10.0][r.random_range(0..3)];
    // tiny graphs may not have enough adjacent edge pairs
    loop {
        match generate(&GeneratorConfig::new(n, delta, delta_e, q, seed)) {
            Ok(inst) => return inst,
            Err(lru_core::Error::InfeasibleConfig(_)) if delta_e > 0.0 => delta_e = (delta_e - 0.25).max(0.0),
            Err(e) => panic!("{e}"),
        }
    }
}

pub fn set(inst: &SystemInstance, labels: &[&str]) -> VertexSet {
    inst.set_from_labels(labels).unwrap()
}

/// Edge labels like "A-L" with endpoints sorted by label, as a sorted set.
pub fn edge_names(inst: &SystemInstance, edges: impl IntoIterator<Item = usize>) -> BTreeSet<String> {
    edges
        .into_iter()
        .map(|e| {
            let [a, b] = inst.edge_pair_labels(e);
            let (a, b) = if natural_lt(&b, &a) { (b, a) } else { (a, b) };
            format!("{a}-{b}")
        })
        .collect()
}

fn natural_lt(a: &str, b: &str) -> bool {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x < y,
        (Ok(_), Err(_)) => false,
        (Err(_), Ok(_)) => true,
        _ => a < b,
    }
}

pub fn names(list: &[&str]) -> BTreeSet<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Γ(Q) computed naively: boundary edges by scanning, then DFS over arcs.
pub fn naive_gamma(inst: &SystemInstance, q: VertexSet) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<usize> = (0..inst.num_edges())
        .filter(|&e| q.contains(inst.edge(e).u) != q.contains(inst.edge(e).v))
        .collect();
    while let Some(e) = stack.pop() {
        if out.insert(e) {
            for &(i, j) in inst.arcs() {
                if i == e {
                    stack.push(j);
                }
            }
        }
    }
    out
}

pub fn naive_omega(inst: &SystemInstance, q: VertexSet) -> f64 {
    let w: f64 = naive_gamma(inst, q).iter().map(|&e| inst.edge(e).w).sum();
    let l: f64 = q.iter().map(|v| inst.vertex(v).cost).sum();
    let r: f64 = q.iter().map(|v| inst.vertex(v).rate).sum();
    r * (w + l)
}

/// Every set partition of `items` (Bell-number many; tiny inputs only).
pub fn all_partitions(items: &[usize]) -> Vec<Vec<VertexSet>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let first = items[0];
    let mut out = Vec::new();
    for p in all_partitions(&items[1..]) {
        for k in 0..p.len() {
            let mut q = p.clone();
            q[k].insert(first);
            out.push(q);
        }
        let mut q = p;
        q.push(VertexSet::singleton(first));
        out.push(q);
    }
    out
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// The five-LRU cycle of the bundled `cycle` fixture, starting at Q_i.
pub fn example_cycle(inst: &SystemInstance) -> Vec<VertexSet> {
    [["1", "2", "3", "4"].as_slice(), &["2", "11", "12", "13"], &["9", "10", "11"], &["7", "8", "9"], &[
        "3", "5", "6", "7",
    ]]
    .iter()
    .map(|l| set(inst, l))
    .collect()
}

/// Cycle LRUs at 1/2 plus singletons for every vertex covered only once.
pub fn example_support(inst: &SystemInstance) -> Vec<(VertexSet, f64)> {
    let mut cols: Vec<(VertexSet, f64)> = example_cycle(inst).into_iter().map(|q| (q, 0.5)).collect();
    for l in ["1", "4", "12", "13", "10", "8", "5", "6"] {
        cols.push((set(inst, &[l]), 0.5));
    }
    cols
}

pub fn redraw(inst: &SystemInstance, seed: u64) -> SystemInstance {
    let mut r = rng(seed);
    let mut raw: RawInstance = inst.to_raw();
    for v in &mut raw.vertices {
        v.rate = r.random_range(0.01..0.5);
        v.cost = r.random_range(10.0..300.0);
    }
    SystemInstance::validate(&raw).unwrap()
}
