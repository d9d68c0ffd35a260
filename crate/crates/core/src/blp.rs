//! The monolithic binary program: every vertex picks one of |V| slots, each
//! nonempty slot is an LRU.
//!
//! Variables per slot i: y_vi (v in slot i), k_i^e (edge e broken for slot i),
//! ρ_ev^i = k_i^e·y_vi and σ_uv^i = y_ui·y_vi, linearised with McCormick rows.

use std::time::Instant;

use lru_lp::{solve_milp, MilpModel, MilpOptions, MilpStatus, Sense};
use serde::{Deserialize, Serialize};

use crate::cost::{design_cost, LruDesign};
use crate::error::{Error, Result};
use crate::instance::{SuccessorSets, SystemInstance};
use crate::sets::VertexSet;

#[derive(Debug, Clone)]
pub struct BlpEncoding {
    pub model: MilpModel,
    pub n: usize,
    pub m: usize,
    /// Whether vertex j is restricted to slots i ≤ j.
    pub symmetry_breaking: bool,
}

impl BlpEncoding {
    pub fn y(&self, v: usize, i: usize) -> usize {
        v * self.n + i
    }

    pub fn k(&self, i: usize, e: usize) -> usize {
        self.n * self.n + i * self.m + e
    }

    pub fn rho(&self, i: usize, e: usize, v: usize) -> usize {
        self.n * self.n + self.n * self.m + (i * self.m + e) * self.n + v
    }

    pub fn sigma(&self, i: usize, u: usize, v: usize) -> usize {
        self.n * self.n + self.n * self.m + self.n * self.m * self.n + (i * self.n + u) * self.n + v
    }

    pub fn num_vars(&self) -> usize {
        self.model.num_vars()
    }

    /// Indicator vector of a partition, with products filled in and each
    /// slot's broken edges set to Γ of its LRU.
    pub fn encode(&self, inst: &SystemInstance, h: &SuccessorSets, sets: &[VertexSet]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.num_vars()];
        for (i, &q) in sets.iter().enumerate() {
            if i >= self.n {
                return Err(Error::NotAPartition("more blocks than slots".into()));
            }
            for v in q.iter() {
                x[self.y(v, i)] = 1.0;
            }
            let gamma = h.removal_set(inst, q)?;
            for e in gamma.ones() {
                x[self.k(i, e)] = 1.0;
                for v in q.iter() {
                    x[self.rho(i, e, v)] = 1.0;
                }
            }
            for u in q.iter() {
                for v in q.iter() {
                    x[self.sigma(i, u, v)] = 1.0;
                }
            }
        }
        Ok(x)
    }

    /// Nonempty slots of a solution, in canonical order.
    pub fn decode(&self, x: &[f64]) -> Vec<VertexSet> {
        let mut sets: Vec<VertexSet> = (0..self.n)
            .map(|i| (0..self.n).filter(|&v| x[self.y(v, i)] > 0.5).collect::<VertexSet>())
            .filter(|q| !q.is_empty())
            .collect();
        crate::sets::sort_canonical(&mut sets);
        sets
    }
}

fn mccormick(model: &mut MilpModel, z: usize, a: usize, b: usize) {
    model.add_lazy_row(vec![(z, 1.0), (a, -1.0)], Sense::Le, 0.0);
    if a != b {
        model.add_lazy_row(vec![(z, 1.0), (b, -1.0)], Sense::Le, 0.0);
        model.add_lazy_row(vec![(z, 1.0), (a, -1.0), (b, -1.0)], Sense::Ge, -1.0);
    } else {
        // a binary squared is itself
        model.add_row(vec![(z, 1.0), (a, -1.0)], Sense::Eq, 0.0);
    }
}

/// Build the program. With `symmetry_breaking`, y_vi is fixed to 0 for i > v.
pub fn build_blp(inst: &SystemInstance, h: &SuccessorSets, symmetry_breaking: bool) -> BlpEncoding {
    let (n, m) = (inst.num_vertices(), inst.num_edges());
    let mut model = MilpModel::new();
    for v in 0..n {
        for i in 0..n {
            let hi = if symmetry_breaking && i > v { 0.0 } else { 1.0 };
            model.add_var(0.0, 0.0, hi, true);
        }
    }
    for _ in 0..n * m {
        model.add_binary(0.0);
    }
    for _ in 0..n {
        for e in 0..m {
            for v in 0..n {
                model.add_var(inst.vertex(v).rate * inst.edge(e).w, 0.0, 1.0, false);
            }
        }
    }
    for _ in 0..n {
        for u in 0..n {
            for v in 0..n {
                model.add_var(inst.vertex(u).cost * inst.vertex(v).rate, 0.0, 1.0, false);
            }
        }
    }
    let mut enc = BlpEncoding { model, n, m, symmetry_breaking };
    let mut model = std::mem::take(&mut enc.model);
    for v in 0..n {
        model.add_row((0..n).map(|i| (enc.y(v, i), 1.0)).collect(), Sense::Eq, 1.0);
    }
    for i in 0..n {
        for (a, edge) in inst.edges().iter().enumerate() {
            let (yu, yv) = (enc.y(edge.u, i), enc.y(edge.v, i));
            for e in h.get(a).ones() {
                let k = enc.k(i, e);
                model.add_lazy_row(vec![(yu, 1.0), (yv, -1.0), (k, -1.0)], Sense::Le, 0.0);
                model.add_lazy_row(vec![(yv, 1.0), (yu, -1.0), (k, -1.0)], Sense::Le, 0.0);
            }
        }
        for e in 0..m {
            for v in 0..n {
                mccormick(&mut model, enc.rho(i, e, v), enc.k(i, e), enc.y(v, i));
            }
        }
        for u in 0..n {
            for v in 0..n {
                mccormick(&mut model, enc.sigma(i, u, v), enc.y(u, i), enc.y(v, i));
            }
        }
    }
    enc.model = model;
    enc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlpStatus {
    Optimal,
    /// A node or time limit stopped the search.
    LimitReached,
}

#[derive(Debug, Clone)]
pub struct BlpOutcome {
    pub status: BlpStatus,
    /// Best design found (the optimum when `status` is `Optimal`).
    pub design: Option<LruDesign>,
    /// Objective of the program at the incumbent.
    pub objective: Option<f64>,
    pub bound: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub wall: std::time::Duration,
}

/// Solve a built encoding. A limit stop is reported through `status`, with
/// the incumbent (if any) and the proven bound.
pub fn solve_blp(
    inst: &SystemInstance,
    h: &SuccessorSets,
    enc: &BlpEncoding,
    opts: &MilpOptions,
) -> Result<BlpOutcome> {
    let started = Instant::now();
    let sol = solve_milp(&enc.model, opts)?;
    let status = match sol.status {
        MilpStatus::Optimal => BlpStatus::Optimal,
        MilpStatus::LimitReached => BlpStatus::LimitReached,
        other => {
            return Err(Error::Lp(lru_lp::LpError::NumericalFailure(format!("benchmark program is {other:?}"))))
        }
    };
    let design = match &sol.x {
        Some(x) => Some(design_cost(inst, h, &enc.decode(x))?),
        None => None,
    };
    Ok(BlpOutcome {
        status,
        design,
        objective: sol.objective,
        bound: sol.bound,
        nodes: sol.nodes,
        lp_iterations: sol.lp_iterations,
        wall: started.elapsed(),
    })
}
