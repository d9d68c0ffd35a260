//! The cover variant: every LRU is a pair (R, F) of a replacement set R and a
//! failure set F ⊆ R. Failure sets partition the parts, replacement sets may
//! overlap, and ω_c(R, F) = (w(Γ(R)) + ℓ(R))·λ(F).
//!
//! Since ω_c is linear in λ(F), the optimum splits per part: each part v pays
//! λ(v) times the cheapest replacement cost over sets containing v, and
//! connected replacement sets suffice because Γ of a disconnected set is the
//! union of Γ over its components.

use lru_lp::{solve_milp, MilpModel, MilpOptions, MilpStatus, Sense};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{SuccessorSets, SystemInstance};
use crate::sets::{sort_canonical, VertexSet};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverLru {
    pub replacement: VertexSet,
    pub failure: VertexSet,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverDesign {
    /// LRUs ordered by failure set.
    pub lrus: Vec<CoverLru>,
    pub pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverLruJson {
    pub replacement: Vec<String>,
    pub failure: Vec<String>,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverDesignJson {
    pub lrus: Vec<CoverLruJson>,
    pub pi: f64,
}

impl CoverDesign {
    pub fn to_json(&self, inst: &SystemInstance) -> CoverDesignJson {
        CoverDesignJson {
            lrus: self
                .lrus
                .iter()
                .map(|l| CoverLruJson {
                    replacement: inst.labels_of(l.replacement),
                    failure: inst.labels_of(l.failure),
                    omega: l.omega,
                })
                .collect(),
            pi: self.pi,
        }
    }
}

/// w(Γ(R)) + ℓ(R).
pub fn replacement_cost(inst: &SystemInstance, h: &SuccessorSets, r: VertexSet) -> Result<f64> {
    Ok(inst.weight_of(&h.removal_set(inst, r)?) + inst.cost_of(r))
}

/// π_c of a cover design given as (replacement, failure) pairs.
pub fn clru_cost(inst: &SystemInstance, h: &SuccessorSets, pairs: &[(VertexSet, VertexSet)]) -> Result<CoverDesign> {
    let mut covered = VertexSet::EMPTY;
    for &(r, f) in pairs {
        if f.is_empty() {
            return Err(Error::FailureSetsNotPartition("empty failure set".into()));
        }
        if !f.is_subset(r) {
            return Err(Error::FailureOutsideReplacement);
        }
        if !r.is_subset(inst.all_vertices()) {
            return Err(Error::UnknownVertex(format!("#{}", r.difference(inst.all_vertices()).first().unwrap())));
        }
        if let Some(v) = covered.intersection(f).first() {
            return Err(Error::FailureSetsNotPartition(format!("vertex {} fails in two LRUs", inst.vertex(v).label)));
        }
        covered = covered.union(f);
    }
    if let Some(v) = inst.all_vertices().difference(covered).first() {
        return Err(Error::FailureSetsNotPartition(format!("vertex {} is in no failure set", inst.vertex(v).label)));
    }
    let mut lrus = Vec::with_capacity(pairs.len());
    for &(r, f) in pairs {
        lrus.push(CoverLru { replacement: r, failure: f, omega: replacement_cost(inst, h, r)? * inst.rate_of(f) });
    }
    lrus.sort_by(|a, b| a.failure.canonical_cmp(b.failure));
    let pi = lrus.iter().map(|l| l.omega).sum();
    Ok(CoverDesign { lrus, pi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClruMode {
    /// Partitions into connected failure sets, each with its best connected
    /// replacement superset.
    Exhaustive,
    /// Every failure-set partition with every replacement superset.
    FullPower,
    /// The slot-indexed binary program.
    Milp,
    /// Per-part cheapest connected replacement set; exact at any size the
    /// connected-set enumeration allows.
    Decomposition,
}

/// Default size limit of the exhaustive mode.
pub const EXHAUSTIVE_CAP: usize = 8;
/// Size limit of the full-power mode.
pub const FULL_POWER_CAP: usize = 6;

/// Optimal cover design. `cap` bounds the instance size for the exhaustive
/// mode; the full-power mode is always limited to [`FULL_POWER_CAP`].
pub fn solve_clru(inst: &SystemInstance, h: &SuccessorSets, mode: ClruMode, cap: usize) -> Result<CoverDesign> {
    let n = inst.num_vertices();
    let limit = match mode {
        ClruMode::Exhaustive => cap.min(20),
        ClruMode::FullPower => FULL_POWER_CAP,
        ClruMode::Milp => cap,
        ClruMode::Decomposition => 20,
    };
    if n > limit {
        return Err(Error::InstanceTooLarge(format!("{n} vertices exceed the {mode:?} limit of {limit}")));
    }
    if n == 0 {
        return Ok(CoverDesign { lrus: Vec::new(), pi: 0.0 });
    }
    match mode {
        ClruMode::Exhaustive => partition_search(inst, h, true),
        ClruMode::FullPower => partition_search(inst, h, false),
        ClruMode::Decomposition => decomposition(inst, h),
        ClruMode::Milp => solve_clru_milp(inst, h, &MilpOptions::default()),
    }
}

/// c(R) = w(Γ(R)) + ℓ(R) for every nonempty R (NaN where skipped).
fn replacement_table(inst: &SystemInstance, h: &SuccessorSets, connected_only: bool) -> Result<Vec<f64>> {
    let size = 1usize << inst.num_vertices();
    let mut c = vec![f64::NAN; size];
    for mask in 1..size {
        let r = VertexSet(mask as u128);
        if !connected_only || inst.is_connected_set(r) {
            c[mask] = replacement_cost(inst, h, r)?;
        }
    }
    Ok(c)
}

/// Cheapest R ⊇ f among table entries (ties to the smaller canonical set).
fn best_superset(table: &[f64], full: usize, f: usize) -> Option<(f64, usize)> {
    let free = full & !f;
    let mut sub = free;
    let mut best: Option<(f64, usize)> = None;
    loop {
        let r = f | sub;
        let c = table[r];
        if !c.is_nan() {
            let better = match best {
                None => true,
                Some((b, s)) => {
                    c < b || (c == b && VertexSet(r as u128).canonical_cmp(VertexSet(s as u128)).is_lt())
                }
            };
            if better {
                best = Some((c, r));
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    best
}

fn partition_search(inst: &SystemInstance, h: &SuccessorSets, connected: bool) -> Result<CoverDesign> {
    let n = inst.num_vertices();
    let size = 1usize << n;
    let full = size - 1;
    let table = replacement_table(inst, h, connected)?;
    // cheapest replacement for every admissible failure set
    let mut block: Vec<Option<(f64, usize)>> = vec![None; size];
    for (f, slot) in block.iter_mut().enumerate().skip(1) {
        let fs = VertexSet(f as u128);
        if connected && !inst.is_connected_set(fs) {
            continue;
        }
        if let Some((c, r)) = best_superset(&table, full, f) {
            *slot = Some((c * inst.rate_of(fs), r));
        }
    }
    let mut best = vec![f64::INFINITY; size];
    let mut choice = vec![(0usize, 0usize); size];
    best[0] = 0.0;
    for mask in 1..size {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let f = sub | low;
            if let Some((cost, r)) = block[f] {
                let total = cost + best[mask ^ f];
                if total < best[mask] {
                    best[mask] = total;
                    choice[mask] = (f, r);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut pairs = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let (f, r) = choice[mask];
        pairs.push((VertexSet(r as u128), VertexSet(f as u128)));
        mask ^= f;
    }
    clru_cost(inst, h, &merge_by_replacement(pairs))
}

/// One LRU per distinct replacement set; the cost is unchanged.
fn merge_by_replacement(pairs: Vec<(VertexSet, VertexSet)>) -> Vec<(VertexSet, VertexSet)> {
    let mut groups: Vec<(VertexSet, VertexSet)> = Vec::new();
    for (r, f) in pairs {
        match groups.iter_mut().find(|(gr, _)| *gr == r) {
            Some(g) => g.1 = g.1.union(f),
            None => groups.push((r, f)),
        }
    }
    groups
}

fn decomposition(inst: &SystemInstance, h: &SuccessorSets) -> Result<CoverDesign> {
    let n = inst.num_vertices();
    let full = (1usize << n) - 1;
    let table = replacement_table(inst, h, true)?;
    let pairs = (0..n)
        .map(|v| {
            let (_, r) = best_superset(&table, full, 1 << v).expect("every singleton is connected");
            (VertexSet(r as u128), VertexSet::singleton(v))
        })
        .collect();
    clru_cost(inst, h, &merge_by_replacement(pairs))
}

/// Index layout of the cover program: per slot i, failure indicators f_vi,
/// replacement indicators r_vi, broken edges k_i^e and the products
/// α_iev = k_i^e·f_vi and β_iuv = r_ui·f_vi.
#[derive(Debug, Clone)]
pub struct ClruEncoding {
    pub model: MilpModel,
    pub n: usize,
    pub m: usize,
}

impl ClruEncoding {
    pub fn f(&self, v: usize, i: usize) -> usize {
        v * self.n + i
    }

    pub fn r(&self, v: usize, i: usize) -> usize {
        self.n * self.n + v * self.n + i
    }

    pub fn k(&self, i: usize, e: usize) -> usize {
        2 * self.n * self.n + i * self.m + e
    }

    pub fn alpha(&self, i: usize, e: usize, v: usize) -> usize {
        2 * self.n * self.n + self.n * self.m + (i * self.m + e) * self.n + v
    }

    pub fn beta(&self, i: usize, u: usize, v: usize) -> usize {
        2 * self.n * self.n + self.n * self.m * (1 + self.n) + (i * self.n + u) * self.n + v
    }

    /// Nonempty slots as (replacement, failure) pairs.
    pub fn decode(&self, x: &[f64]) -> Vec<(VertexSet, VertexSet)> {
        (0..self.n)
            .map(|i| {
                let f: VertexSet = (0..self.n).filter(|&v| x[self.f(v, i)] > 0.5).collect();
                let r: VertexSet = (0..self.n).filter(|&v| x[self.r(v, i)] > 0.5).collect();
                (r, f)
            })
            .filter(|(_, f)| !f.is_empty())
            .collect()
    }
}

pub fn build_clru_milp(inst: &SystemInstance, h: &SuccessorSets) -> ClruEncoding {
    let (n, m) = (inst.num_vertices(), inst.num_edges());
    let mut model = MilpModel::new();
    for v in 0..n {
        for i in 0..n {
            model.add_var(0.0, 0.0, if i > v { 0.0 } else { 1.0 }, true);
        }
    }
    for _ in 0..n * n + n * m {
        model.add_binary(0.0);
    }
    for _ in 0..n {
        for e in 0..m {
            for v in 0..n {
                model.add_var(inst.edge(e).w * inst.vertex(v).rate, 0.0, 1.0, false);
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
    let enc = ClruEncoding { model: MilpModel::new(), n, m };
    for v in 0..n {
        model.add_row((0..n).map(|i| (enc.f(v, i), 1.0)).collect(), Sense::Eq, 1.0);
        for i in 0..n {
            model.add_row(vec![(enc.f(v, i), 1.0), (enc.r(v, i), -1.0)], Sense::Le, 0.0);
        }
    }
    for i in 0..n {
        for (a, edge) in inst.edges().iter().enumerate() {
            let (ru, rv) = (enc.r(edge.u, i), enc.r(edge.v, i));
            for e in h.get(a).ones() {
                let k = enc.k(i, e);
                model.add_lazy_row(vec![(ru, 1.0), (rv, -1.0), (k, -1.0)], Sense::Le, 0.0);
                model.add_lazy_row(vec![(rv, 1.0), (ru, -1.0), (k, -1.0)], Sense::Le, 0.0);
            }
        }
        let mut product = |z: usize, a: usize, b: usize| {
            model.add_lazy_row(vec![(z, 1.0), (a, -1.0)], Sense::Le, 0.0);
            model.add_lazy_row(vec![(z, 1.0), (b, -1.0)], Sense::Le, 0.0);
            model.add_lazy_row(vec![(z, 1.0), (a, -1.0), (b, -1.0)], Sense::Ge, -1.0);
        };
        for e in 0..m {
            for v in 0..n {
                product(enc.alpha(i, e, v), enc.k(i, e), enc.f(v, i));
            }
        }
        for u in 0..n {
            for v in 0..n {
                product(enc.beta(i, u, v), enc.r(u, i), enc.f(v, i));
            }
        }
    }
    ClruEncoding { model, ..enc }
}

pub fn solve_clru_milp(inst: &SystemInstance, h: &SuccessorSets, opts: &MilpOptions) -> Result<CoverDesign> {
    let enc = build_clru_milp(inst, h);
    let sol = solve_milp(&enc.model, opts)?;
    match (sol.status, sol.x) {
        (MilpStatus::Optimal, Some(x)) => {
            let mut pairs = enc.decode(&x);
            // the program may leave replacement indicators on where they cost nothing extra
            pairs.sort_by(|a, b| a.1.canonical_cmp(b.1));
            clru_cost(inst, h, &pairs)
        }
        (MilpStatus::LimitReached, _) => Err(Error::LimitReached(format!("cover program after {} nodes", sol.nodes))),
        (status, _) => Err(Error::Lp(lru_lp::LpError::NumericalFailure(format!("cover program is {status:?}")))),
    }
}

/// Δπ = (π* − π_c*)/π_c*.
pub fn relative_gap(pi_partition: f64, pi_cover: f64) -> f64 {
    (pi_partition - pi_cover) / pi_cover
}

/// Sort helper for tests and reports: failure sets of a design, canonical.
pub fn failure_sets(d: &CoverDesign) -> Vec<VertexSet> {
    let mut s: Vec<VertexSet> = d.lrus.iter().map(|l| l.failure).collect();
    sort_canonical(&mut s);
    s
}
