//! Column generation on the set-partitioning LP.
//!
//! The restricted master starts from the singleton columns. Each round prices
//! a column of minimal reduced cost ω(Q) − Σ_{v∈Q} r_v; once that minimum is
//! nonnegative the basic optimal solution of the master is integral and is
//! returned as the design.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use log::{debug, warn};
use lru_lp::{solve_milp, LpModel, LpStatus, MilpModel, MilpOptions, MilpStatus, Sense, Simplex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{design_cost, lru_cost, LruDesign};
use crate::error::{Error, Result};
use crate::instance::{SuccessorSets, SystemInstance};
use crate::sets::VertexSet;
use crate::structure::{certify, max_fractionality, Certificate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Column {
    pub members: VertexSet,
    pub omega: f64,
}

/// Distinct connected LRU columns; always contains every singleton.
#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    columns: Vec<Column>,
    seen: HashSet<VertexSet>,
}

impl ColumnPool {
    pub fn singletons(inst: &SystemInstance, h: &SuccessorSets) -> Result<Self> {
        let mut pool = ColumnPool::default();
        for v in 0..inst.num_vertices() {
            pool.insert(inst, h, VertexSet::singleton(v))?;
        }
        Ok(pool)
    }

    /// Add `q` unless already present; returns the new column index.
    pub fn insert(&mut self, inst: &SystemInstance, h: &SuccessorSets, q: VertexSet) -> Result<Option<usize>> {
        assert!(inst.is_connected_set(q), "pool columns must be connected");
        if self.seen.contains(&q) {
            return Ok(None);
        }
        let omega = lru_cost(inst, h, q)?.omega;
        self.seen.insert(q);
        self.columns.push(Column { members: q, omega });
        Ok(Some(self.columns.len() - 1))
    }

    pub fn contains(&self, q: VertexSet) -> bool {
        self.seen.contains(&q)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    fn master_lp(&self, n: usize) -> LpModel {
        let mut lp = LpModel::new();
        let mut rows = vec![Vec::new(); n];
        for (j, c) in self.columns.iter().enumerate() {
            lp.add_var(c.omega, 0.0, f64::INFINITY);
            for v in c.members.iter() {
                rows[v].push((j, 1.0));
            }
        }
        for r in rows {
            lp.add_row(r, Sense::Eq, 1.0);
        }
        lp
    }
}

/// A primal/dual solution of the restricted master over a [`ColumnPool`].
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    /// x_Q per pool column, in pool order.
    pub x: Vec<f64>,
    pub objective: f64,
    /// r_v per vertex.
    pub duals: Vec<f64>,
}

impl FractionalSolution {
    /// Columns with positive weight.
    pub fn support(&self, pool: &ColumnPool) -> Vec<(VertexSet, f64)> {
        pool.columns.iter().zip(&self.x).filter(|&(_, &x)| x > 1e-9).map(|(c, &x)| (c.members, x)).collect()
    }
}

/// Solve the restricted master from scratch.
pub fn solve_restricted_master(inst: &SystemInstance, pool: &ColumnPool) -> Result<FractionalSolution> {
    let mut s = Simplex::new(&pool.master_lp(inst.num_vertices()))?;
    match s.solve()? {
        LpStatus::Optimal => {}
        other => return Err(Error::Lp(lru_lp::LpError::NumericalFailure(format!("restricted master is {other:?}")))),
    }
    Ok(FractionalSolution { x: s.values(), objective: s.objective(), duals: s.duals() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PricingMethod {
    Enumeration,
    Milp,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    pub column: VertexSet,
    /// ω(Q) − Σ_{v∈Q} r_v for `column`.
    pub reduced_cost: f64,
    pub method: PricingMethod,
}

pub fn reduced_cost(inst: &SystemInstance, h: &SuccessorSets, duals: &[f64], q: VertexSet) -> Result<f64> {
    Ok(lru_cost(inst, h, q)?.omega - q.iter().map(|v| duals[v]).sum::<f64>())
}

/// Default size limit of [`price_enumeration`].
pub const ENUMERATION_CAP: usize = 25;

const WORDS: usize = 8;
type Bits = [u64; WORDS];

/// Flat copies of the instance data used by the enumeration.
struct Pricer {
    n: usize,
    adj: Vec<u128>,
    incident: Vec<Bits>,
    h: Vec<Bits>,
    w: Vec<f64>,
    rate: Vec<f64>,
    cost: Vec<f64>,
}

fn or(a: &mut Bits, b: &Bits) {
    for k in 0..WORDS {
        a[k] |= b[k];
    }
}

impl Pricer {
    fn new(inst: &SystemInstance, h: &SuccessorSets, cap: usize) -> Result<Self> {
        let n = inst.num_vertices();
        if n > cap {
            return Err(Error::InstanceTooLarge(format!("{n} vertices exceed the enumeration cap of {cap}")));
        }
        let m = inst.num_edges();
        if m > WORDS * 64 {
            return Err(Error::InstanceTooLarge(format!("{m} edges exceed the enumeration limit of {}", WORDS * 64)));
        }
        let bits = |s: &crate::sets::EdgeSet| {
            let mut b = [0u64; WORDS];
            for e in s.ones() {
                b[e / 64] |= 1 << (e % 64);
            }
            b
        };
        Ok(Pricer {
            n,
            adj: (0..n).map(|v| inst.neighbors(v).0).collect(),
            incident: (0..n).map(|v| bits(inst.incident_edges(v))).collect(),
            h: (0..m).map(|e| bits(h.get(e))).collect(),
            w: inst.edges().iter().map(|e| e.w).collect(),
            rate: inst.vertices().iter().map(|v| v.rate).collect(),
            cost: inst.vertices().iter().map(|v| v.cost).collect(),
        })
    }

    /// w(closure of `edges`).
    fn closure_weight(&self, edges: &Bits) -> f64 {
        let mut g = [0u64; WORDS];
        for (k, &word) in edges.iter().enumerate() {
            let mut x = word;
            while x != 0 {
                let e = k * 64 + x.trailing_zeros() as usize;
                x &= x - 1;
                or(&mut g, &self.h[e]);
            }
        }
        let mut total = 0.0;
        for (k, &word) in g.iter().enumerate() {
            let mut x = word;
            while x != 0 {
                total += self.w[k * 64 + x.trailing_zeros() as usize];
                x &= x - 1;
            }
        }
        total
    }

    fn reach(&self, from: u128, within: u128) -> u128 {
        let mut seen = from;
        let mut frontier = from;
        while frontier != 0 {
            let mut next = 0u128;
            let mut f = frontier;
            while f != 0 {
                next |= self.adj[f.trailing_zeros() as usize];
                f &= f - 1;
            }
            frontier = next & within & !seen;
            seen |= frontier;
        }
        seen
    }
}

#[derive(Clone, Copy)]
struct Best {
    rc: f64,
    set: VertexSet,
}

impl Best {
    const NONE: Best = Best { rc: f64::INFINITY, set: VertexSet::EMPTY };

    fn better(self, o: Best) -> Best {
        if o.rc < self.rc || (o.rc == self.rc && !o.set.is_empty() && o.set.canonical_cmp(self.set).is_lt()) {
            o
        } else {
            self
        }
    }
}

struct Search<'a> {
    p: &'a Pricer,
    r: &'a [f64],
    incumbent: &'a AtomicU64,
    nodes: u64,
}

#[derive(Clone, Copy)]
struct State {
    q: u128,
    nbrs: u128,
    boundary: Bits,
    rate: f64,
    cost: f64,
    dual: f64,
}

impl Search<'_> {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Relaxed))
    }

    fn offer(&self, rc: f64) {
        let mut cur = self.incumbent.load(Ordering::Relaxed);
        while rc < f64::from_bits(cur) {
            match self.incumbent.compare_exchange_weak(cur, rc.to_bits(), Ordering::Relaxed, Ordering::Relaxed) {
                Ok(_) => break,
                Err(now) => cur = now,
            }
        }
    }

    /// Visit `st` and every connected superset avoiding `banned`.
    fn visit(&mut self, st: State, banned: u128, banned_edges: &Bits, best: &mut Best) {
        self.nodes += 1;
        let p = self.p;
        let rc = st.rate * (p.closure_weight(&st.boundary) + st.cost) - st.dual;
        *best = best.better(Best { rc, set: VertexSet(st.q) });
        self.offer(rc);

        let all = VertexSet::full(p.n).0;
        let cand = st.nbrs & !st.q & !banned & all;
        if cand == 0 {
            return;
        }
        // Lower bound over supersets: boundary edges into banned vertices stay
        // broken, and each added vertex t contributes at least
        // λ_t(W_f + ℓ(Q)) + λ(Q)ℓ_t − r_t.
        let mut fixed = st.boundary;
        for k in 0..WORDS {
            fixed[k] &= banned_edges[k];
        }
        let wf = p.closure_weight(&fixed);
        let base = wf + st.cost;
        let mut lb = st.rate * base - st.dual;
        let mut rest = p.reach(st.q, all & !banned) & !st.q;
        while rest != 0 {
            let t = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            lb += (p.rate[t] * base + st.rate * p.cost[t] - self.r[t]).min(0.0);
        }
        let inc = self.incumbent();
        if lb > inc + 1e-12 * (1.0 + inc.abs()) {
            return;
        }

        let mut banned = banned;
        let mut banned_edges = *banned_edges;
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            let mut boundary = st.boundary;
            for k in 0..WORDS {
                boundary[k] ^= p.incident[v][k];
            }
            let child = State {
                q: st.q | 1 << v,
                nbrs: st.nbrs | p.adj[v],
                boundary,
                rate: st.rate + p.rate[v],
                cost: st.cost + p.cost[v],
                dual: st.dual + self.r[v],
            };
            self.visit(child, banned, &banned_edges, best);
            banned |= 1 << v;
            or(&mut banned_edges, &p.incident[v]);
        }
    }
}

/// Exact pricing over connected nonempty sets by enumeration with bound pruning.
///
/// Roots are searched in parallel; the result is the minimum by reduced cost
/// and then by canonical set order, so it does not depend on scheduling.
pub fn price_enumeration(inst: &SystemInstance, h: &SuccessorSets, duals: &[f64]) -> Result<PricingResult> {
    price_enumeration_capped(inst, h, duals, ENUMERATION_CAP)
}

pub fn price_enumeration_capped(
    inst: &SystemInstance,
    h: &SuccessorSets,
    duals: &[f64],
    cap: usize,
) -> Result<PricingResult> {
    let p = Pricer::new(inst, h, cap)?;
    enumerate(&p, duals)
}

fn enumerate(p: &Pricer, duals: &[f64]) -> Result<PricingResult> {
    let n = p.n;
    if n == 0 {
        return Err(Error::EmptyLru);
    }
    let start = (0..n)
        .map(|v| p.rate[v] * (p.closure_weight(&p.incident[v]) + p.cost[v]) - duals[v])
        .fold(f64::INFINITY, f64::min);
    let incumbent = AtomicU64::new(start.to_bits());
    let best = (0..n)
        .into_par_iter()
        .map(|root| {
            let mut s = Search { p, r: duals, incumbent: &incumbent, nodes: 0 };
            let banned = (1u128 << root) - 1;
            let mut banned_edges = [0u64; WORDS];
            for v in 0..root {
                or(&mut banned_edges, &p.incident[v]);
            }
            let st = State {
                q: 1 << root,
                nbrs: p.adj[root],
                boundary: p.incident[root],
                rate: p.rate[root],
                cost: p.cost[root],
                dual: duals[root],
            };
            let mut best = Best::NONE;
            s.visit(st, banned, &banned_edges, &mut best);
            best
        })
        .reduce(|| Best::NONE, Best::better);
    Ok(PricingResult { column: best.set, reduced_cost: best.rc, method: PricingMethod::Enumeration })
}

/// Index layout of the pricing program.
#[derive(Debug, Clone)]
pub struct PricingMilp {
    pub model: MilpModel,
    pub n: usize,
    pub m: usize,
}

impl PricingMilp {
    pub fn gamma(&self, v: usize) -> usize {
        v
    }

    pub fn k(&self, e: usize) -> usize {
        self.n + e
    }

    /// η_ev = k^e·γ_v.
    pub fn eta(&self, e: usize, v: usize) -> usize {
        self.n + self.m + e * self.n + v
    }

    /// δ_uv = γ_u·γ_v.
    pub fn delta(&self, u: usize, v: usize) -> usize {
        self.n + self.m + self.m * self.n + u * self.n + v
    }

    /// The member set encoded by a solution vector.
    pub fn decode(&self, x: &[f64]) -> VertexSet {
        (0..self.n).filter(|&v| x[self.gamma(v)] > 0.5).collect()
    }
}

/// Push the three McCormick rows of `z = a·b`; rows where a == b are merged.
fn mccormick(model: &mut MilpModel, z: usize, a: usize, b: usize) {
    model.add_lazy_row(vec![(z, 1.0), (a, -1.0)], Sense::Le, 0.0);
    if a != b {
        model.add_lazy_row(vec![(z, 1.0), (b, -1.0)], Sense::Le, 0.0);
        model.add_lazy_row(vec![(z, 1.0), (a, -1.0), (b, -1.0)], Sense::Ge, -1.0);
    } else {
        model.add_lazy_row(vec![(z, 1.0), (a, -1.0)], Sense::Le, 0.0);
        model.add_lazy_row(vec![(z, 1.0), (a, -2.0)], Sense::Ge, -1.0);
    }
}

/// The linearised pricing program: binaries γ_v (membership) and k^e (edge
/// broken), product variables η_ev and δ_uv, and Σγ ≥ 1 so that the empty set
/// is excluded.
pub fn build_pricing_milp(inst: &SystemInstance, h: &SuccessorSets, duals: &[f64]) -> PricingMilp {
    let (n, m) = (inst.num_vertices(), inst.num_edges());
    let mut model = MilpModel::new();
    for v in 0..n {
        model.add_binary(-duals[v]);
    }
    for _ in 0..m {
        model.add_binary(0.0);
    }
    for e in 0..m {
        for v in 0..n {
            model.add_var(inst.vertex(v).rate * inst.edge(e).w, 0.0, 1.0, false);
        }
    }
    for u in 0..n {
        for v in 0..n {
            model.add_var(inst.vertex(u).cost * inst.vertex(v).rate, 0.0, 1.0, false);
        }
    }
    let enc = PricingMilp { model, n, m };
    let mut model = enc.model.clone();
    model.add_row((0..n).map(|v| (v, 1.0)).collect(), Sense::Ge, 1.0);
    for (a, edge) in inst.edges().iter().enumerate() {
        for e in h.get(a).ones() {
            let (gu, gv, k) = (enc.gamma(edge.u), enc.gamma(edge.v), enc.k(e));
            model.add_lazy_row(vec![(gu, 1.0), (gv, -1.0), (k, -1.0)], Sense::Le, 0.0);
            model.add_lazy_row(vec![(gv, 1.0), (gu, -1.0), (k, -1.0)], Sense::Le, 0.0);
        }
    }
    for e in 0..m {
        for v in 0..n {
            mccormick(&mut model, enc.eta(e, v), enc.k(e), enc.gamma(v));
        }
    }
    for u in 0..n {
        for v in 0..n {
            mccormick(&mut model, enc.delta(u, v), enc.gamma(u), enc.gamma(v));
        }
    }
    PricingMilp { model, ..enc }
}

/// Default options for pricing programs: a tight gap so the optimum is exact.
pub fn pricing_milp_options() -> MilpOptions {
    MilpOptions { rel_gap: 1e-10, ..MilpOptions::default() }
}

/// Price by solving the linearised program. A disconnected optimum is replaced
/// by its component of least reduced cost, which is never worse.
pub fn price_milp(
    inst: &SystemInstance,
    h: &SuccessorSets,
    duals: &[f64],
    opts: &MilpOptions,
) -> Result<PricingResult> {
    let enc = build_pricing_milp(inst, h, duals);
    let sol = solve_milp(&enc.model, opts)?;
    let x = match (sol.status, sol.x) {
        (MilpStatus::Optimal, Some(x)) => x,
        (MilpStatus::LimitReached, _) => {
            return Err(Error::LimitReached(format!("pricing program stopped after {} nodes", sol.nodes)))
        }
        (status, _) => {
            return Err(Error::Lp(lru_lp::LpError::NumericalFailure(format!("pricing program is {status:?}"))))
        }
    };
    let q = enc.decode(&x);
    let mut best = Best::NONE;
    for c in inst.components_of(q) {
        best = best.better(Best { rc: reduced_cost(inst, h, duals, c)?, set: c });
    }
    Ok(PricingResult { column: best.set, reduced_cost: best.rc, method: PricingMethod::Milp })
}

#[derive(Debug, Clone)]
pub struct ColgenOptions {
    pub pricing: PricingMethod,
    pub enumeration_cap: usize,
    pub max_iterations: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Attach a structural certificate of the final support.
    pub certify: bool,
    pub milp: MilpOptions,
}

impl Default for ColgenOptions {
    fn default() -> Self {
        ColgenOptions {
            pricing: PricingMethod::Enumeration,
            enumeration_cap: ENUMERATION_CAP,
            max_iterations: None,
            time_limit: None,
            certify: false,
            milp: pricing_milp_options(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The minimal reduced cost is nonnegative.
    Converged,
    /// Pricing returned a column that is already in the pool.
    DuplicateColumn,
    IterationLimit,
    TimeLimit,
}

impl StopReason {
    pub fn is_premature(self) -> bool {
        matches!(self, StopReason::IterationLimit | StopReason::TimeLimit)
    }
}

#[derive(Debug, Clone)]
pub struct ColgenOutcome {
    /// The integral design; `None` only after a premature stop with a
    /// fractional master solution.
    pub design: Option<LruDesign>,
    /// Positive-weight columns of the final master solution(s).
    pub support: Vec<(VertexSet, f64)>,
    pub objective: f64,
    pub stop: StopReason,
    /// Master solves over all components.
    pub iterations: usize,
    pub columns: usize,
    /// Master objective after every solve, per component.
    pub history: Vec<Vec<f64>>,
    pub certificate: Option<Certificate>,
    pub warnings: Vec<String>,
}

struct ComponentRun {
    support: Vec<(VertexSet, f64)>,
    objective: f64,
    stop: StopReason,
    iterations: usize,
    columns: usize,
    history: Vec<f64>,
}

fn run_component(
    inst: &SystemInstance,
    h: &SuccessorSets,
    opts: &ColgenOptions,
    started: Instant,
) -> Result<ComponentRun> {
    let n = inst.num_vertices();
    let mut pool = ColumnPool::singletons(inst, h)?;
    let pricer = match opts.pricing {
        PricingMethod::Enumeration => Some(Pricer::new(inst, h, opts.enumeration_cap)?),
        _ => None,
    };
    let mut master = Simplex::new(&pool.master_lp(n))?;
    let mut history = Vec::new();
    let stop = loop {
        match master.solve()? {
            LpStatus::Optimal => {}
            other => {
                return Err(Error::Lp(lru_lp::LpError::NumericalFailure(format!("restricted master is {other:?}"))))
            }
        }
        let objective = master.objective();
        history.push(objective);
        if opts.max_iterations.is_some_and(|k| history.len() >= k) {
            break StopReason::IterationLimit;
        }
        if opts.time_limit.is_some_and(|t| started.elapsed() >= t) {
            break StopReason::TimeLimit;
        }
        let duals = master.duals();
        let priced = match (&pricer, opts.pricing) {
            (Some(p), _) => enumerate(p, &duals)?,
            (None, PricingMethod::Milp) => price_milp(inst, h, &duals, &opts.milp)?,
            (None, _) => crate::oracle::oracle_price(inst, h, &duals, crate::oracle::PRICE_CAP)?,
        };
        let eps = 1e-7 * (1.0 + objective.abs());
        debug!("iteration {}: objective {objective}, reduced cost {}", history.len(), priced.reduced_cost);
        if priced.reduced_cost >= -eps {
            break StopReason::Converged;
        }
        match pool.insert(inst, h, priced.column)? {
            Some(j) => {
                let coeffs: Vec<(usize, f64)> = priced.column.iter().map(|v| (v, 1.0)).collect();
                let col = master.add_col(pool.columns[j].omega, 0.0, f64::INFINITY, &coeffs)?;
                debug_assert_eq!(col, j);
            }
            None => break StopReason::DuplicateColumn,
        }
    };
    let x = master.values();
    let support = pool.columns.iter().zip(&x).filter(|&(_, &x)| x > 1e-9).map(|(c, &x)| (c.members, x)).collect();
    Ok(ComponentRun {
        support,
        objective: master.objective(),
        stop,
        iterations: history.len(),
        columns: pool.len(),
        history,
    })
}

/// Solve LRU Design by column generation, splitting disconnected instances
/// into components first.
pub fn solve_lru_design_colgen(inst: &SystemInstance, h: &SuccessorSets, opts: &ColgenOptions) -> Result<ColgenOutcome> {
    let started = Instant::now();
    let comps = inst.connected_components();
    let mut support = Vec::new();
    let mut out = ColgenOutcome {
        design: None,
        support: Vec::new(),
        objective: 0.0,
        stop: StopReason::Converged,
        iterations: 0,
        columns: 0,
        history: Vec::new(),
        certificate: None,
        warnings: Vec::new(),
    };
    for comp in &comps {
        let run = if comps.len() == 1 {
            run_component(inst, h, opts, started)?
        } else {
            let hc = SuccessorSets::compute(&comp.instance);
            run_component(&comp.instance, &hc, opts, started)?
        };
        support.extend(run.support.iter().map(|&(q, x)| (comp.lift(q), x)));
        out.objective += run.objective;
        out.iterations += run.iterations;
        out.columns += run.columns;
        out.history.push(run.history);
        match run.stop {
            StopReason::DuplicateColumn => {
                out.warnings.push("pricing repeated a pool column; stopped within tolerance".into());
                if out.stop == StopReason::Converged {
                    out.stop = run.stop;
                }
            }
            s if s.is_premature() => out.stop = s,
            _ => {}
        }
    }
    let frac = max_fractionality(&support);
    if frac > 1e-6 {
        if out.stop.is_premature() {
            let msg = format!("stopped early ({:?}) with a fractional master solution", out.stop);
            warn!("{msg}");
            out.warnings.push(msg);
        } else {
            return Err(Error::IntegralityViolation(frac));
        }
    } else {
        if out.stop.is_premature() {
            out.warnings.push(format!("stopped early ({:?}); the design may not be optimal", out.stop));
        }
        let sets: Vec<VertexSet> = support.iter().filter(|&&(_, x)| x > 0.5).map(|&(q, _)| q).collect();
        out.design = Some(design_cost(inst, h, &sets)?);
    }
    if opts.certify {
        out.certificate = Some(certify(inst, &support));
    }
    out.support = support;
    Ok(out)
}
