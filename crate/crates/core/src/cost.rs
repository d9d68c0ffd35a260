//! LRU and design costs under additive failure rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{SuccessorSets, SystemInstance};
use crate::sets::{sort_canonical, EdgeSet, VertexSet};

#[derive(Debug, Clone)]
pub struct Lru {
    pub members: VertexSet,
    /// Γ(Q).
    pub gamma: EdgeSet,
    /// λ(Q) = Σ λ(v).
    pub rate: f64,
    /// Σ ℓ(u) over members.
    pub purchase: f64,
    /// Σ w(e) over Γ(Q).
    pub removal: f64,
    /// ω(Q) = λ(Q) · (removal + purchase).
    pub omega: f64,
}

/// ω(Q) for a nonempty `q`.
pub fn lru_cost(inst: &SystemInstance, h: &SuccessorSets, q: VertexSet) -> Result<Lru> {
    let gamma = h.removal_set(inst, q)?;
    let rate = inst.rate_of(q);
    let purchase = inst.cost_of(q);
    let removal = inst.weight_of(&gamma);
    Ok(Lru { members: q, gamma, rate, purchase, removal, omega: rate * (removal + purchase) })
}

/// Just the number ω(Q); panics on an empty set.
pub fn omega(inst: &SystemInstance, h: &SuccessorSets, q: VertexSet) -> f64 {
    lru_cost(inst, h, q).expect("nonempty LRU").omega
}

#[derive(Debug, Clone)]
pub struct LruDesign {
    /// LRUs in canonical order (by smallest member).
    pub lrus: Vec<Lru>,
    /// π(S) = Σ ω(Q).
    pub pi: f64,
}

impl LruDesign {
    pub fn sets(&self) -> Vec<VertexSet> {
        self.lrus.iter().map(|l| l.members).collect()
    }

    pub fn len(&self) -> usize {
        self.lrus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lrus.is_empty()
    }

    pub fn to_json(&self, inst: &SystemInstance) -> DesignJson {
        DesignJson {
            lrus: self.lrus.iter().map(|l| inst.labels_of(l.members)).collect(),
            pi: self.pi,
            per_lru: self
                .lrus
                .iter()
                .map(|l| LruJson {
                    members: inst.labels_of(l.members),
                    omega: l.omega,
                    gamma: l.gamma.ones().map(|e| inst.edge_pair_labels(e)).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LruJson {
    pub members: Vec<String>,
    pub omega: f64,
    pub gamma: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignJson {
    pub lrus: Vec<Vec<String>>,
    pub pi: f64,
    #[serde(default)]
    pub per_lru: Vec<LruJson>,
}

impl DesignJson {
    pub fn sets(&self, inst: &SystemInstance) -> Result<Vec<VertexSet>> {
        self.lrus.iter().map(|l| inst.set_from_labels(l)).collect()
    }
}

/// Check that `sets` partition the vertex set, naming the first problem found.
pub fn check_partition(inst: &SystemInstance, sets: &[VertexSet]) -> Result<()> {
    let mut covered = VertexSet::EMPTY;
    for q in sets {
        if q.is_empty() {
            return Err(Error::EmptyLru);
        }
        let overlap = covered.intersection(*q);
        if let Some(v) = overlap.first() {
            return Err(Error::NotAPartition(format!("vertex {} is in more than one LRU", inst.vertex(v).label)));
        }
        if let Some(v) = q.difference(inst.all_vertices()).first() {
            return Err(Error::NotAPartition(format!("vertex index {v} is outside the instance")));
        }
        covered = covered.union(*q);
    }
    if let Some(v) = inst.all_vertices().difference(covered).first() {
        return Err(Error::NotAPartition(format!("vertex {} is not covered", inst.vertex(v).label)));
    }
    Ok(())
}

/// π(S) for a partition `sets`; the result lists LRUs in canonical order.
pub fn design_cost(inst: &SystemInstance, h: &SuccessorSets, sets: &[VertexSet]) -> Result<LruDesign> {
    check_partition(inst, sets)?;
    let mut sorted = sets.to_vec();
    sort_canonical(&mut sorted);
    let lrus = sorted.iter().map(|&q| lru_cost(inst, h, q)).collect::<Result<Vec<_>>>()?;
    let pi = lrus.iter().map(|l| l.omega).sum();
    Ok(LruDesign { lrus, pi })
}

/// Whether every LRU induces a connected subgraph of G.
pub fn is_connected_design(inst: &SystemInstance, sets: &[VertexSet]) -> bool {
    sets.iter().all(|&q| inst.is_connected_set(q))
}

/// Relative comparison used for cost equality.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}
