//! Seeded random instances: a random spanning tree topped up with extra
//! edges, and precedence arcs oriented by a random edge ranking so that D is
//! acyclic by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Edge, SystemInstance, Vertex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_vertices: usize,
    /// Average vertex degree δ; the graph gets round(δ·|V|) edges.
    pub avg_degree: f64,
    /// Average out-degree δ_E of D; round(δ_E·|E|) arcs are drawn.
    pub avg_out_degree: f64,
    /// Factor applied to every edge weight after drawing.
    pub edge_scale: f64,
    pub seed: u64,
    pub rate_range: (f64, f64),
    pub cost_range: (f64, f64),
    pub weight_range: (f64, f64),
}

impl GeneratorConfig {
    pub fn new(n_vertices: usize, avg_degree: f64, avg_out_degree: f64, edge_scale: f64, seed: u64) -> Self {
        GeneratorConfig {
            n_vertices,
            avg_degree,
            avg_out_degree,
            edge_scale,
            seed,
            rate_range: (0.01, 0.5),
            cost_range: (10.0, 300.0),
            weight_range: (1.0, 120.0),
        }
    }

    pub fn num_edges(&self) -> usize {
        (self.avg_degree * self.n_vertices as f64).round() as usize
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleConfig(msg));
        let n = self.n_vertices;
        if n == 0 {
            return bad("at least one vertex is required".into());
        }
        if n > crate::sets::MAX_VERTICES {
            return Err(Error::InstanceTooLarge(format!("{n} vertices")));
        }
        for (what, x) in [("avg_degree", self.avg_degree), ("avg_out_degree", self.avg_out_degree)] {
            if !(x.is_finite() && x >= 0.0) {
                return bad(format!("{what} must be a non-negative number, got {x}"));
            }
        }
        if !(self.edge_scale.is_finite() && self.edge_scale > 0.0) {
            return Err(Error::NonPositiveFactor(self.edge_scale));
        }
        for (what, (lo, hi)) in [("rate", self.rate_range), ("cost", self.cost_range), ("weight", self.weight_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return bad(format!("{what} range [{lo}, {hi}] must be positive and ordered"));
            }
        }
        let m = self.num_edges();
        if m + 1 < n {
            return bad(format!("{m} edges cannot connect {n} vertices"));
        }
        if m > n * (n - 1) / 2 {
            return bad(format!("{m} edges exceed the {} possible pairs", n * (n - 1) / 2));
        }
        Ok(())
    }
}

fn uniform(rng: &mut Xoshiro256PlusPlus, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Build a random instance. Identical configs give identical instances.
pub fn generate(cfg: &GeneratorConfig) -> Result<SystemInstance> {
    cfg.check()?;
    let n = cfg.n_vertices;
    let m = cfg.num_edges();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut adj = vec![vec![false; n]; n];
    let mut pairs = Vec::with_capacity(m);
    for k in 1..n {
        let (a, b) = (order[k], order[rng.random_range(0..k)]);
        adj[a][b] = true;
        adj[b][a] = true;
        pairs.push((a.min(b), a.max(b)));
    }
    let mut free: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| !adj[u][v]).collect();
    let extra = m - pairs.len();
    for k in 0..extra {
        let j = rng.random_range(k..free.len());
        free.swap(k, j);
        pairs.push(free[k]);
    }
    pairs.sort_unstable();

    // Random ranking of the edges; every arc points from lower to higher rank.
    let mut rank: Vec<usize> = (0..m).collect();
    rank.shuffle(&mut rng);
    let mut adjacent = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (pairs[i], pairs[j]);
            if a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1 {
                adjacent.push((i, j));
            }
        }
    }
    let n_arcs = (cfg.avg_out_degree * m as f64).round() as usize;
    if n_arcs > adjacent.len() {
        return Err(Error::InfeasibleConfig(format!(
            "{n_arcs} arcs requested but only {} adjacent edge pairs exist",
            adjacent.len()
        )));
    }
    let mut taken = std::collections::HashSet::new();
    let mut arcs = Vec::with_capacity(n_arcs);
    let mut rejections = 0usize;
    while arcs.len() < n_arcs {
        let (i, j) = adjacent[rng.random_range(0..adjacent.len())];
        let arc = if rank[i] < rank[j] { (i, j) } else { (j, i) };
        if taken.insert(arc) {
            arcs.push(arc);
            rejections = 0;
        } else {
            rejections += 1;
            if rejections > 10 * n_arcs {
                return Err(Error::InfeasibleConfig(format!(
                    "gave up drawing {n_arcs} distinct arcs after {rejections} consecutive duplicates"
                )));
            }
        }
    }

    let vertices = (0..n)
        .map(|v| {
            let rate = uniform(&mut rng, cfg.rate_range);
            let cost = uniform(&mut rng, cfg.cost_range);
            Vertex { label: (v + 1).to_string(), name: None, cost, rate }
        })
        .collect();
    let edges = pairs
        .iter()
        .map(|&(u, v)| Edge { u, v, w: uniform(&mut rng, cfg.weight_range) * cfg.edge_scale })
        .collect();
    let meta = serde_json::json!({ "generator": cfg, "rng": "xoshiro256++" });
    SystemInstance::from_parts(vertices, edges, arcs, Some(meta))
}

/// Copy of `inst` with every edge weight multiplied by `q`.
pub fn scale_edge_weights(inst: &SystemInstance, q: f64) -> Result<SystemInstance> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::NonPositiveFactor(q));
    }
    let edges = inst.edges().iter().map(|e| Edge { w: e.w * q, ..*e }).collect();
    SystemInstance::from_parts(inst.vertices().to_vec(), edges, inst.arcs().to_vec(), inst.meta().cloned())
}
