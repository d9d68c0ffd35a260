//! Structural checks on sets of LRUs: LRU cycles, the cycle-splitting
//! improvement, the removal-path inclusions it rests on, and total balance
//! of the support matrix.

use serde::{Deserialize, Serialize};

use crate::cost::lru_cost;
use crate::error::{Error, Result};
use crate::instance::{SuccessorSets, SystemInstance};
use crate::sets::{EdgeSet, VertexSet};

/// An ordered cyclic list of at least three connected LRUs whose consecutive
/// intersections are nonempty and pairwise distinct in both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LruCycle {
    sets: Vec<VertexSet>,
}

/// Why `sets` is not an LRU cycle, or `Ok` if it is one.
pub fn check_lru_cycle(inst: &SystemInstance, sets: &[VertexSet]) -> std::result::Result<(), String> {
    let n = sets.len();
    if n < 3 {
        return Err(format!("needs at least 3 LRUs, got {n}"));
    }
    for (i, q) in sets.iter().enumerate() {
        if !inst.is_connected_set(*q) {
            return Err(format!("LRU {i} is not connected"));
        }
        if sets[..i].contains(q) {
            return Err(format!("LRU {i} repeats an earlier LRU"));
        }
    }
    let meet = |i: usize| sets[i % n].intersection(sets[(i + 1) % n]);
    for i in 0..n {
        let (a, b) = (meet(i), meet(i + 1));
        if a.is_empty() {
            return Err(format!("LRUs {i} and {} do not intersect", (i + 1) % n));
        }
        if a.difference(b).is_empty() || b.difference(a).is_empty() {
            return Err(format!("intersections at {i} and {} are nested", (i + 1) % n));
        }
    }
    Ok(())
}

impl LruCycle {
    pub fn new(inst: &SystemInstance, sets: Vec<VertexSet>) -> Result<Self> {
        check_lru_cycle(inst, &sets).map_err(Error::NotACycle)?;
        Ok(LruCycle { sets })
    }

    pub fn sets(&self) -> &[VertexSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Q_i with the index taken modulo the cycle length (negative allowed).
    pub fn get(&self, i: isize) -> VertexSet {
        self.sets[i.rem_euclid(self.sets.len() as isize) as usize]
    }
}

/// A shortest LRU cycle among `support`, or `None`.
///
/// Lengths are tried in increasing order; within a length the first LRU of the
/// cycle is the one with the lowest position in `support`, and candidates are
/// explored in support order, so the result is deterministic.
pub fn find_lru_cycle(inst: &SystemInstance, support: &[VertexSet]) -> Option<LruCycle> {
    let cols: Vec<(usize, VertexSet)> = support
        .iter()
        .copied()
        .enumerate()
        .filter(|&(i, q)| inst.is_connected_set(q) && !support[..i].contains(&q))
        .collect();
    let k = cols.len();
    for len in 3..=k {
        for start in 0..k {
            let mut path = vec![start];
            if extend_cycle(&cols, len, &mut path) {
                let sets = path.iter().map(|&p| cols[p].1).collect();
                return Some(LruCycle { sets });
            }
        }
    }
    None
}

fn extend_cycle(cols: &[(usize, VertexSet)], len: usize, path: &mut Vec<usize>) -> bool {
    let set = |p: usize| cols[p].1;
    let nested = |a: VertexSet, b: VertexSet| a.difference(b).is_empty() || b.difference(a).is_empty();
    let last = *path.last().unwrap();
    if path.len() == len {
        let first = path[0];
        let closing = set(last).intersection(set(first));
        if closing.is_empty() {
            return false;
        }
        let second = set(first).intersection(set(path[1]));
        let before = set(path[len - 2]).intersection(set(last));
        return !nested(before, closing) && !nested(closing, second);
    }
    for next in path[0] + 1..cols.len() {
        if path.contains(&next) {
            continue;
        }
        let meet = set(last).intersection(set(next));
        if meet.is_empty() {
            continue;
        }
        if path.len() >= 2 && nested(set(path[path.len() - 2]).intersection(set(last)), meet) {
            continue;
        }
        path.push(next);
        if extend_cycle(cols, len, path) {
            return true;
        }
        path.pop();
    }
    false
}

/// 𝓕(X, Y) = Γ(X) \ Γ(Y): edges broken for X but not for Y.
pub fn difference_set(inst: &SystemInstance, h: &SuccessorSets, x: VertexSet, y: VertexSet) -> Result<EdgeSet> {
    let mut gx = h.removal_set(inst, x)?;
    gx.difference_with(&h.removal_set(inst, y)?);
    Ok(gx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionCheck {
    pub holds: bool,
    /// Edges of the left-hand side missing from the right-hand side.
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub index: usize,
    pub checks: [InclusionCheck; 4],
}

impl InclusionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Check the four removal-path inclusions around Q_i of a minimal cycle:
///
/// 1. Γ(Qi∩Qi+1) \ 𝓕(Qi∩Qi+1, Qi) ⊆ Γ(Qi) \ 𝓕(Qi∩Qi−1, Qi−1)
/// 2. Γ(Qi\Qi+1) \ 𝓕(Qi∩Qi+1, Qi) ⊆ Γ(Qi) \ 𝓕(Qi∩Qi+1, Qi+1)
/// 3. Γ(Qi∩Qi−1) \ 𝓕(Qi∩Qi−1, Qi) ⊆ Γ(Qi) \ 𝓕(Qi∩Qi+1, Qi+1)
/// 4. Γ(Qi\Qi−1) \ 𝓕(Qi∩Qi−1, Qi) ⊆ Γ(Qi) \ 𝓕(Qi∩Qi−1, Qi−1)
pub fn verify_removal_path_inclusions(
    inst: &SystemInstance,
    h: &SuccessorSets,
    c: &LruCycle,
    i: usize,
) -> Result<InclusionReport> {
    let i = i % c.len();
    let ii = i as isize;
    let (qi, next, prev) = (c.get(ii), c.get(ii + 1), c.get(ii - 1));
    let (up, down) = (qi.intersection(next), qi.intersection(prev));
    let gamma = |q: VertexSet| h.removal_set(inst, q);
    let f = |x: VertexSet, y: VertexSet| difference_set(inst, h, x, y);
    let minus = |mut a: EdgeSet, b: &EdgeSet| {
        a.difference_with(b);
        a
    };
    let g_qi = gamma(qi)?;
    let rhs_prev = minus(g_qi.clone(), &f(down, prev)?);
    let rhs_next = minus(g_qi, &f(up, next)?);
    let f_up = f(up, qi)?;
    let f_down = f(down, qi)?;
    let check = |lhs: EdgeSet, rhs: &EdgeSet| {
        let witness: Vec<usize> = lhs.difference(rhs).collect();
        InclusionCheck { holds: witness.is_empty(), witness }
    };
    Ok(InclusionReport {
        index: i,
        checks: [
            check(minus(gamma(up)?, &f_up), &rhs_prev),
            check(minus(gamma(qi.difference(next))?, &f_up), &rhs_next),
            check(minus(gamma(down)?, &f_down), &rhs_next),
            check(minus(gamma(qi.difference(prev))?, &f_down), &rhs_prev),
        ],
    })
}

/// Σ ω(Q)·x_Q over weighted columns.
pub fn weighted_objective(inst: &SystemInstance, h: &SuccessorSets, cols: &[(VertexSet, f64)]) -> Result<f64> {
    let mut total = 0.0;
    for &(q, x) in cols {
        total += x * lru_cost(inst, h, q)?.omega;
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    /// The improved weighted columns (zero-weight columns dropped).
    pub columns: Vec<(VertexSet, f64)>,
    /// Position of the split LRU in the cycle.
    pub index: usize,
    /// Whether Q_i was split along Q_{i+1} (true) or Q_{i-1} (false).
    pub toward_next: bool,
    pub parts: [VertexSet; 2],
    pub objective_before: f64,
    pub objective_after: f64,
}

/// Remove a cycle from a fractional solution by splitting its cheapest member.
///
/// For each Q_j let W_j = min(w(𝓕(Qj∩Qj+1, Qj)), w(𝓕(Qj∩Qj−1, Qj))). The LRU
/// with the smallest W_j (lowest index on ties) is split along whichever
/// neighbour attains its minimum (the next one on ties); its weight moves to
/// both parts.
pub fn cycle_split_improve(
    inst: &SystemInstance,
    h: &SuccessorSets,
    columns: &[(VertexSet, f64)],
    c: &LruCycle,
) -> Result<SplitOutcome> {
    let weight_of = |q: VertexSet| columns.iter().filter(|&&(s, _)| s == q).map(|&(_, x)| x).sum::<f64>();
    for &q in c.sets() {
        if weight_of(q) <= 0.0 {
            return Err(Error::NotInSupport);
        }
    }
    let mut best: Option<(f64, usize, bool)> = None;
    for j in 0..c.len() {
        let jj = j as isize;
        let q = c.get(jj);
        let up = inst.weight_of(&difference_set(inst, h, q.intersection(c.get(jj + 1)), q)?);
        let down = inst.weight_of(&difference_set(inst, h, q.intersection(c.get(jj - 1)), q)?);
        let (wj, toward_next) = if up <= down { (up, true) } else { (down, false) };
        if best.is_none_or(|(b, _, _)| wj < b) {
            best = Some((wj, j, toward_next));
        }
    }
    let (_, i, toward_next) = best.expect("cycles are nonempty");
    let qi = c.get(i as isize);
    let other = c.get(i as isize + if toward_next { 1 } else { -1 });
    let parts = [qi.intersection(other), qi.difference(other)];
    let xi = weight_of(qi);

    let mut out: Vec<(VertexSet, f64)> = Vec::with_capacity(columns.len() + 2);
    for &(q, x) in columns {
        if q == qi || x <= 0.0 {
            continue;
        }
        match out.iter_mut().find(|(s, _)| *s == q) {
            Some(slot) => slot.1 += x,
            None => out.push((q, x)),
        }
    }
    for p in parts {
        match out.iter_mut().find(|(s, _)| *s == p) {
            Some(slot) => slot.1 += xi,
            None => out.push((p, xi)),
        }
    }
    Ok(SplitOutcome {
        objective_before: weighted_objective(inst, h, columns)?,
        objective_after: weighted_objective(inst, h, &out)?,
        columns: out,
        index: i,
        toward_next,
        parts,
    })
}

/// A 0/1 matrix with one row per vertex and one column per LRU.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    pub rows: usize,
    pub cols: Vec<VertexSet>,
}

impl BinaryMatrix {
    pub fn new(rows: usize, cols: Vec<VertexSet>) -> Self {
        BinaryMatrix { rows, cols }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.cols[c].contains(r)
    }
}

/// Row and column indices of a square submatrix with all row and column sums
/// equal to 2 and no two equal columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submatrix {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

pub fn is_totally_balanced(m: &BinaryMatrix) -> bool {
    unbalanced_submatrix(m).is_none()
}

/// A forbidden submatrix of `m`, if there is one.
///
/// Such a submatrix exists exactly when the bipartite row/column incidence
/// graph has a chordless cycle of length at least 6; cycles are found by
/// growing induced paths from their smallest node.
pub fn unbalanced_submatrix(m: &BinaryMatrix) -> Option<Submatrix> {
    let r = m.rows;
    let total = r + m.cols.len();
    assert!(total <= 128, "matrix too large for the chordless-cycle search");
    let mut adj = vec![0u128; total];
    for (c, col) in m.cols.iter().enumerate() {
        for v in col.iter().filter(|&v| v < r) {
            adj[v] |= 1u128 << (r + c);
            adj[r + c] |= 1u128 << v;
        }
    }
    for start in 0..total {
        let mut path = vec![start];
        if let Some(cycle) = induced_cycle(&adj, start, &mut path, 1u128 << start) {
            let mut rows: Vec<usize> = cycle.iter().copied().filter(|&x| x < r).collect();
            let mut cols: Vec<usize> = cycle.iter().filter(|&&x| x >= r).map(|&x| x - r).collect();
            rows.sort_unstable();
            cols.sort_unstable();
            return Some(Submatrix { rows, cols });
        }
    }
    None
}

fn induced_cycle(adj: &[u128], start: usize, path: &mut Vec<usize>, on_path: u128) -> Option<Vec<usize>> {
    let last = *path.last().unwrap();
    // nodes adjacent to an interior path node would create a chord
    let interior = path[1..path.len().max(2) - 1].iter().fold(0u128, |acc, &p| acc | adj[p]);
    let above_start = !((1u128 << (start + 1)) - 1);
    let mut cand = adj[last] & !on_path & !interior & above_start;
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        if path.len() >= 2 && adj[v] >> start & 1 == 1 {
            if path.len() + 1 >= 6 {
                path.push(v);
                return Some(path.clone());
            }
            continue;
        }
        path.push(v);
        if let Some(c) = induced_cycle(adj, start, path, on_path | 1u128 << v) {
            return Some(c);
        }
        path.pop();
    }
    None
}

/// Structural facts about the support of a (possibly fractional) solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub cycle_free: bool,
    pub totally_balanced: bool,
    pub connected: bool,
    pub integral: bool,
}

impl Certificate {
    pub fn all(&self) -> bool {
        self.cycle_free && self.totally_balanced && self.connected && self.integral
    }
}

/// Largest distance of a weight from the nearest integer.
pub fn max_fractionality(columns: &[(VertexSet, f64)]) -> f64 {
    columns.iter().map(|&(_, x)| (x - x.round()).abs()).fold(0.0, f64::max)
}

/// Certify the support `{Q : x_Q > 0}` of weighted columns over `inst`.
pub fn certify(inst: &SystemInstance, columns: &[(VertexSet, f64)]) -> Certificate {
    let support: Vec<VertexSet> = columns.iter().filter(|&&(_, x)| x > 1e-9).map(|&(q, _)| q).collect();
    let connected = support.iter().all(|&q| inst.is_connected_set(q));
    let integral = max_fractionality(columns) <= 1e-6;
    // disjoint columns can neither overlap in a cycle nor form a forbidden submatrix
    let mut seen = VertexSet::EMPTY;
    let disjoint = support.iter().all(|&q| {
        let ok = q.is_disjoint(seen);
        seen = seen.union(q);
        ok
    });
    if disjoint {
        return Certificate { cycle_free: true, totally_balanced: true, connected, integral };
    }
    Certificate {
        cycle_free: find_lru_cycle(inst, &support).is_none(),
        totally_balanced: is_totally_balanced(&BinaryMatrix::new(inst.num_vertices(), support.clone())),
        connected,
        integral,
    }
}
