//! Best-first branch and bound over integer variables.
//!
//! Inequality rows flagged `lazy` start outside the working LP and are added
//! only when an LP solution violates them. The working LP is always a
//! relaxation of the node problem, so its objective stays a valid bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::model::{LpModel, Row, Sense};
use crate::simplex::{LpStatus, Simplex};
use crate::LpError;

#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub lp: LpModel,
    pub integer: Vec<bool>,
    /// Per row: may be kept out of the working LP until violated.
    pub lazy: Vec<bool>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64, integer: bool) -> usize {
        self.integer.push(integer);
        self.lp.add_var(cost, lower, upper)
    }

    pub fn add_binary(&mut self, cost: f64) -> usize {
        self.add_var(cost, 0.0, 1.0, true)
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.lazy.push(false);
        self.lp.add_row(coeffs, sense, rhs)
    }

    /// Add an inequality that the solver may activate on demand.
    pub fn add_lazy_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.lazy.push(sense != Sense::Eq);
        self.lp.add_row(coeffs, sense, rhs)
    }

    pub fn num_vars(&self) -> usize {
        self.lp.num_vars()
    }

    pub fn num_rows(&self) -> usize {
        self.lp.num_rows()
    }
}

#[derive(Debug, Clone)]
pub struct MilpOptions {
    /// Stop once `incumbent - bound <= rel_gap * (1 + |incumbent|)`.
    pub rel_gap: f64,
    pub integrality_tol: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    /// Keep lazy rows out of the LP until violated.
    pub lazy_rows: bool,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self { rel_gap: 1e-6, integrality_tol: 1e-6, node_limit: None, time_limit: None, lazy_rows: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A node or time limit stopped the search; an incumbent may exist.
    LimitReached,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Best proven lower bound.
    pub bound: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
}

#[derive(Debug)]
struct Node {
    bound: f64,
    id: u64,
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound, then oldest node, pops first.
    fn cmp(&self, o: &Self) -> Ordering {
        o.bound.total_cmp(&self.bound).then(o.id.cmp(&self.id))
    }
}

enum NodeResult {
    Infeasible,
    Unbounded,
    Cutoff,
    Solved(f64, Vec<f64>),
}

struct Search<'a> {
    model: &'a MilpModel,
    lp: Simplex,
    /// Working-LP row index -> model row index.
    active: Vec<usize>,
    is_active: Vec<bool>,
    root_bounds: Vec<(f64, f64)>,
    modified: Vec<usize>,
    base_rows: usize,
}

impl<'a> Search<'a> {
    fn new(model: &'a MilpModel, opts: &'a MilpOptions) -> Result<Self, LpError> {
        let lazy = |i: usize| opts.lazy_rows && model.lazy[i];
        let mut work = LpModel {
            cost: model.lp.cost.clone(),
            lower: model.lp.lower.clone(),
            upper: model.lp.upper.clone(),
            rows: Vec::new(),
        };
        let mut active = Vec::new();
        let mut is_active = vec![false; model.num_rows()];
        for (i, r) in model.lp.rows.iter().enumerate() {
            if !lazy(i) {
                work.rows.push(r.clone());
                active.push(i);
                is_active[i] = true;
            }
        }
        let base_rows = active.len();
        let lp = Simplex::new(&work)?;
        let root_bounds = (0..model.num_vars()).map(|j| (model.lp.lower[j], model.lp.upper[j])).collect();
        Ok(Search { model, lp, active, is_active, root_bounds, modified: Vec::new(), base_rows })
    }

    fn apply(&mut self, changes: &[(usize, f64, f64)]) -> Result<(), LpError> {
        for &j in &self.modified {
            let (l, u) = self.root_bounds[j];
            self.lp.set_bounds(j, l, u)?;
        }
        self.modified.clear();
        for &(j, l, u) in changes {
            self.lp.set_bounds(j, l, u)?;
            self.modified.push(j);
        }
        Ok(())
    }

    fn activate(&mut self, i: usize) -> Result<(), LpError> {
        let r: &Row = &self.model.lp.rows[i];
        self.lp.add_row(&r.coeffs, r.sense, r.rhs)?;
        self.active.push(i);
        self.is_active[i] = true;
        Ok(())
    }

    /// Drop lazily added rows that are slack at the current basis.
    fn purge(&mut self) -> Result<(), LpError> {
        let lazy_active = self.active.len() - self.base_rows;
        if lazy_active < 2 * self.base_rows.max(200) {
            return Ok(());
        }
        let mut drop = Vec::new();
        for w in self.base_rows..self.active.len() {
            if self.lp.row_is_removable(w) {
                let r = &self.model.lp.rows[self.active[w]];
                let slack = (self.lp.row_activity(w) - r.rhs).abs();
                if slack > 1e-6 {
                    drop.push(w);
                }
            }
        }
        if drop.is_empty() {
            return Ok(());
        }
        self.lp.remove_rows(&drop)?;
        let mut keep = vec![true; self.active.len()];
        for &w in &drop {
            keep[w] = false;
            self.is_active[self.active[w]] = false;
        }
        let mut k = 0;
        self.active.retain(|_| {
            let b = keep[k];
            k += 1;
            b
        });
        Ok(())
    }

    fn solve_node(&mut self, cutoff: f64) -> Result<NodeResult, LpError> {
        loop {
            match self.lp.solve()? {
                LpStatus::Infeasible => return Ok(NodeResult::Infeasible),
                LpStatus::Unbounded => {
                    let missing: Vec<usize> = (0..self.model.num_rows()).filter(|&i| !self.is_active[i]).collect();
                    if missing.is_empty() {
                        return Ok(NodeResult::Unbounded);
                    }
                    for i in missing {
                        self.activate(i)?;
                    }
                }
                LpStatus::Optimal => {
                    let obj = self.lp.objective();
                    if obj >= cutoff {
                        return Ok(NodeResult::Cutoff);
                    }
                    let x = self.lp.values();
                    let mut violated: Vec<(f64, usize)> = self
                        .model
                        .lp
                        .rows
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| !self.is_active[*i])
                        .filter_map(|(i, r)| {
                            let v = r.violation(&x);
                            (v > 1e-7).then_some((v, i))
                        })
                        .collect();
                    if violated.is_empty() {
                        return Ok(NodeResult::Solved(obj, x));
                    }
                    violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                    let cap = 50.max(self.base_rows / 2);
                    for &(_, i) in violated.iter().take(cap) {
                        self.activate(i)?;
                    }
                }
            }
        }
    }
}

/// Solve a mixed-integer minimisation problem by branch and bound.
pub fn solve_milp(model: &MilpModel, opts: &MilpOptions) -> Result<MilpSolution, LpError> {
    model.lp.validate()?;
    if model.integer.len() != model.num_vars() || model.lazy.len() != model.num_rows() {
        return Err(LpError::InvalidModel("integrality or lazy flags do not match the model".into()));
    }
    let start = Instant::now();
    let mut search = Search::new(model, opts)?;
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut next_id = 1u64;
    let mut next: Option<Node> = Some(Node { bound: f64::NEG_INFINITY, id: 0, changes: Vec::new() });
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 0u64;
    let mut limit_hit = false;
    let gap_tol = |inc: f64| opts.rel_gap * (1.0 + inc.abs());
    let cutoff_of = |inc: &Option<(f64, Vec<f64>)>| match inc {
        Some((v, _)) => v - gap_tol(*v),
        None => f64::INFINITY,
    };

    loop {
        let node = match next.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => {
                    if n.bound >= cutoff_of(&incumbent) {
                        // Every remaining node is at least as bad.
                        heap.clear();
                        break;
                    }
                    n
                }
                None => break,
            },
        };
        let over_nodes = opts.node_limit.is_some_and(|l| nodes >= l);
        let over_time = opts.time_limit.is_some_and(|t| start.elapsed() >= t);
        if over_nodes || over_time {
            heap.push(node);
            limit_hit = true;
            break;
        }
        nodes += 1;
        search.apply(&node.changes)?;
        search.purge()?;
        let cutoff = cutoff_of(&incumbent);
        let (obj, x) = match search.solve_node(cutoff)? {
            NodeResult::Infeasible | NodeResult::Cutoff => continue,
            NodeResult::Unbounded => {
                return Ok(MilpSolution {
                    status: MilpStatus::Unbounded,
                    x: None,
                    objective: None,
                    bound: f64::NEG_INFINITY,
                    nodes,
                    lp_iterations: search.lp.iterations(),
                })
            }
            NodeResult::Solved(o, x) => (o, x),
        };
        // Most fractional integer variable, lowest index on ties.
        let mut branch: Option<(usize, f64)> = None;
        for (j, &v) in x.iter().enumerate() {
            if !model.integer[j] {
                continue;
            }
            let f = v - v.floor();
            let dist = f.min(1.0 - f);
            if dist > opts.integrality_tol && branch.is_none_or(|(_, d)| dist > d + 1e-12) {
                branch = Some((j, dist));
            }
        }
        match branch {
            None => {
                let mut xi = x;
                for (j, v) in xi.iter_mut().enumerate() {
                    if model.integer[j] {
                        *v = v.round();
                    }
                }
                let val = model.lp.objective(&xi);
                if incumbent.as_ref().is_none_or(|(b, _)| val < *b) {
                    log::debug!("milp: incumbent {val} at node {nodes}");
                    incumbent = Some((val, xi));
                }
            }
            Some((j, _)) => {
                let v = x[j];
                let (lo, hi) = {
                    let mut b = search.root_bounds[j];
                    for &(k, l, u) in &node.changes {
                        if k == j {
                            b = (l, u);
                        }
                    }
                    b
                };
                let mut down = node.changes.clone();
                down.push((j, lo, v.floor()));
                let mut up = node.changes;
                up.push((j, v.ceil(), hi));
                let up_first = v - v.floor() >= 0.5;
                let (first, second) = if up_first { (up, down) } else { (down, up) };
                heap.push(Node { bound: obj, id: next_id + 1, changes: second });
                next = Some(Node { bound: obj, id: next_id, changes: first });
                next_id += 2;
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let lp_iterations = search.lp.iterations();
    Ok(match incumbent {
        Some((val, x)) => {
            let bound = open_bound.min(val);
            let status = if limit_hit && val - bound > gap_tol(val) { MilpStatus::LimitReached } else { MilpStatus::Optimal };
            MilpSolution { status, x: Some(x), objective: Some(val), bound, nodes, lp_iterations }
        }
        None => MilpSolution {
            status: if limit_hit { MilpStatus::LimitReached } else { MilpStatus::Infeasible },
            x: None,
            objective: None,
            bound: if limit_hit { open_bound } else { f64::INFINITY },
            nodes,
            lp_iterations,
        },
    })
}
