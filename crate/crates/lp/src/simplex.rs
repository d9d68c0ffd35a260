//! Bounded revised simplex with an explicit dense basis inverse.
//!
//! Every row `i` gets a slack `s_i` so that `a_i·x + s_i = b_i`; the slack's
//! bounds encode the row sense. Structural columns are stored sparse. The
//! solver keeps its basis between calls, so columns, rows and bound changes
//! can be applied incrementally and re-optimised from a warm start.

use crate::model::{LpModel, Sense};
use crate::LpError;

const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Primal feasibility tolerance on bounds.
    pub primal: f64,
    /// Dual feasibility tolerance on reduced costs.
    pub dual: f64,
    /// Smallest pivot magnitude accepted in ratio tests.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { primal: 1e-9, dual: 1e-9, pivot: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Structural(usize),
    Slack(usize),
}

enum Step {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    kind: Vec<Kind>,
    state: Vec<State>,
    x: Vec<f64>,
    rhs: Vec<f64>,
    structural: Vec<usize>,
    slack: Vec<usize>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    since_refactor: usize,
    dirty: bool,
    status: Option<LpStatus>,
    tol: Tolerances,
    iterations: u64,
}

fn slack_bounds(sense: Sense) -> (f64, f64) {
    match sense {
        Sense::Eq => (0.0, 0.0),
        Sense::Le => (0.0, INF),
        Sense::Ge => (-INF, 0.0),
    }
}

fn merge_coeffs(coeffs: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = coeffs.to_vec();
    v.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

impl Simplex {
    pub fn new(lp: &LpModel) -> Result<Self, LpError> {
        lp.validate()?;
        let mut s = Simplex {
            m: 0,
            cols: Vec::new(),
            cost: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            kind: Vec::new(),
            state: Vec::new(),
            x: Vec::new(),
            rhs: Vec::new(),
            structural: Vec::new(),
            slack: Vec::new(),
            basis: Vec::new(),
            binv: Vec::new(),
            since_refactor: 0,
            dirty: true,
            status: None,
            tol: Tolerances::default(),
            iterations: 0,
        };
        for j in 0..lp.num_vars() {
            s.push_structural(lp.cost[j], lp.lower[j], lp.upper[j], Vec::new());
        }
        let mut colmap: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
        for (i, row) in lp.rows.iter().enumerate() {
            for (j, a) in merge_coeffs(&row.coeffs) {
                colmap[j].push((i, a));
            }
        }
        for (j, c) in colmap.into_iter().enumerate() {
            s.cols[s.structural[j]] = c;
        }
        s.m = lp.num_rows();
        s.rhs = lp.rows.iter().map(|r| r.rhs).collect();
        for (i, row) in lp.rows.iter().enumerate() {
            let (l, u) = slack_bounds(row.sense);
            let v = s.cols.len();
            s.cols.push(vec![(i, 1.0)]);
            s.cost.push(0.0);
            s.lo.push(l);
            s.hi.push(u);
            s.kind.push(Kind::Slack(i));
            s.state.push(State::Basic(i));
            s.x.push(0.0);
            s.slack.push(v);
            s.basis.push(v);
        }
        s.binv = identity(s.m);
        Ok(s)
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    fn push_structural(&mut self, cost: f64, lo: f64, hi: f64, col: Vec<(usize, f64)>) -> usize {
        let v = self.cols.len();
        self.cols.push(col);
        self.cost.push(cost);
        self.lo.push(lo);
        self.hi.push(hi);
        self.kind.push(Kind::Structural(self.structural.len()));
        let st = nonbasic_start(cost, lo, hi);
        self.x.push(nonbasic_value(st, lo, hi));
        self.state.push(st);
        self.structural.push(v);
        self.structural.len() - 1
    }

    pub fn num_cols(&self) -> usize {
        self.structural.len()
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    /// Append a structural column; returns its index.
    pub fn add_col(&mut self, cost: f64, lo: f64, hi: f64, coeffs: &[(usize, f64)]) -> Result<usize, LpError> {
        if lo > hi || lo.is_nan() || hi.is_nan() || !cost.is_finite() {
            return Err(LpError::InvalidModel("bad column bounds or cost".into()));
        }
        let col = merge_coeffs(coeffs);
        if col.iter().any(|&(i, a)| i >= self.m || !a.is_finite()) {
            return Err(LpError::InvalidModel("column references a missing row".into()));
        }
        let j = self.push_structural(cost, lo, hi, col);
        self.dirty = true;
        self.status = None;
        Ok(j)
    }

    /// Append a row over structural columns; its slack enters the basis.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], sense: Sense, rhs: f64) -> Result<usize, LpError> {
        if !rhs.is_finite() {
            return Err(LpError::InvalidModel("non-finite rhs".into()));
        }
        let coeffs = merge_coeffs(coeffs);
        if coeffs.iter().any(|&(j, a)| j >= self.structural.len() || !a.is_finite()) {
            return Err(LpError::InvalidModel("row references a missing column".into()));
        }
        let i = self.m;
        // Extend B^{-1}: [[Binv, 0], [-r_B Binv, 1]] where r_B are the new row's
        // coefficients on the current basic variables.
        let mut r_b = vec![0.0; self.m];
        for &(j, a) in &coeffs {
            let v = self.structural[j];
            self.cols[v].push((i, a));
            if let State::Basic(k) = self.state[v] {
                r_b[k] = a;
            }
        }
        let old = self.m;
        let newm = old + 1;
        let mut nb = vec![0.0; newm * newm];
        for r in 0..old {
            nb[r * newm..r * newm + old].copy_from_slice(&self.binv[r * old..(r + 1) * old]);
        }
        for (k, &rk) in r_b.iter().enumerate() {
            if rk != 0.0 {
                let row = &self.binv[k * old..(k + 1) * old];
                for c in 0..old {
                    nb[old * newm + c] -= rk * row[c];
                }
            }
        }
        nb[old * newm + old] = 1.0;
        self.binv = nb;
        self.m = newm;
        self.rhs.push(rhs);
        let (l, u) = slack_bounds(sense);
        let v = self.cols.len();
        self.cols.push(vec![(i, 1.0)]);
        self.cost.push(0.0);
        self.lo.push(l);
        self.hi.push(u);
        self.kind.push(Kind::Slack(i));
        self.state.push(State::Basic(old));
        let act: f64 = coeffs.iter().map(|&(j, a)| a * self.x[self.structural[j]]).sum();
        self.x.push(rhs - act);
        self.slack.push(v);
        self.basis.push(v);
        self.status = None;
        Ok(i)
    }

    /// Whether row `i`'s slack is basic, i.e. the row can be dropped without
    /// disturbing the rest of the basis.
    pub fn row_is_removable(&self, i: usize) -> bool {
        matches!(self.state[self.slack[i]], State::Basic(_))
    }

    /// Remove rows whose slacks are basic. Remaining rows are renumbered in
    /// order. Rows whose slack is nonbasic are rejected.
    pub fn remove_rows(&mut self, rows: &[usize]) -> Result<(), LpError> {
        if rows.is_empty() {
            return Ok(());
        }
        let mut drop_row = vec![false; self.m];
        for &i in rows {
            if i >= self.m || !self.row_is_removable(i) {
                return Err(LpError::InvalidModel(format!("row {i} cannot be removed")));
            }
            drop_row[i] = true;
        }
        let mut drop_pos = vec![false; self.m];
        for (i, &d) in drop_row.iter().enumerate() {
            if d {
                if let State::Basic(k) = self.state[self.slack[i]] {
                    drop_pos[k] = true;
                }
            }
        }
        let old = self.m;
        let keep_rows: Vec<usize> = (0..old).filter(|&i| !drop_row[i]).collect();
        let keep_pos: Vec<usize> = (0..old).filter(|&k| !drop_pos[k]).collect();
        let newm = keep_rows.len();
        let mut row_map = vec![usize::MAX; old];
        for (ni, &i) in keep_rows.iter().enumerate() {
            row_map[i] = ni;
        }
        let mut nb = vec![0.0; newm * newm];
        for (nk, &k) in keep_pos.iter().enumerate() {
            for (ni, &i) in keep_rows.iter().enumerate() {
                nb[nk * newm + ni] = self.binv[k * old + i];
            }
        }
        // Compact variables: remove slacks of dropped rows.
        let nvar = self.cols.len();
        let mut var_map = vec![usize::MAX; nvar];
        let mut next = 0;
        for v in 0..nvar {
            let dead = matches!(self.kind[v], Kind::Slack(i) if drop_row[i]);
            if !dead {
                var_map[v] = next;
                next += 1;
            }
        }
        let mut cols = Vec::with_capacity(next);
        let mut cost = Vec::with_capacity(next);
        let mut lo = Vec::with_capacity(next);
        let mut hi = Vec::with_capacity(next);
        let mut kind = Vec::with_capacity(next);
        let mut state = Vec::with_capacity(next);
        let mut x = Vec::with_capacity(next);
        for v in 0..nvar {
            if var_map[v] == usize::MAX {
                continue;
            }
            let col: Vec<(usize, f64)> = self.cols[v]
                .iter()
                .filter(|e| !drop_row[e.0])
                .map(|&(i, a)| (row_map[i], a))
                .collect();
            cols.push(col);
            cost.push(self.cost[v]);
            lo.push(self.lo[v]);
            hi.push(self.hi[v]);
            kind.push(match self.kind[v] {
                Kind::Slack(i) => Kind::Slack(row_map[i]),
                k => k,
            });
            state.push(self.state[v]);
            x.push(self.x[v]);
        }
        let basis: Vec<usize> = keep_pos.iter().map(|&k| var_map[self.basis[k]]).collect();
        for (nk, &v) in basis.iter().enumerate() {
            state[v] = State::Basic(nk);
        }
        self.cols = cols;
        self.cost = cost;
        self.lo = lo;
        self.hi = hi;
        self.kind = kind;
        self.state = state;
        self.x = x;
        self.basis = basis;
        self.binv = nb;
        self.m = newm;
        self.rhs = keep_rows.iter().map(|&i| self.rhs[i]).collect();
        self.structural = self.structural.iter().map(|&v| var_map[v]).collect();
        self.slack = keep_rows.iter().map(|&i| var_map[self.slack[i]]).collect();
        self.status = None;
        Ok(())
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        let v = self.structural[j];
        (self.lo[v], self.hi[v])
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) -> Result<(), LpError> {
        if lo > hi || lo.is_nan() || hi.is_nan() {
            return Err(LpError::InvalidModel(format!("bad bounds [{lo}, {hi}] for column {j}")));
        }
        let v = self.structural[j];
        if self.lo[v] == lo && self.hi[v] == hi {
            return Ok(());
        }
        self.lo[v] = lo;
        self.hi[v] = hi;
        match self.state[v] {
            State::Basic(_) => {}
            st => {
                let st = match st {
                    State::Lower if lo.is_finite() => State::Lower,
                    State::Upper if hi.is_finite() => State::Upper,
                    _ => nonbasic_start(self.cost[v], lo, hi),
                };
                self.state[v] = st;
                let nv = nonbasic_value(st, lo, hi);
                if nv != self.x[v] {
                    self.x[v] = nv;
                    self.dirty = true;
                }
            }
        }
        self.status = None;
        Ok(())
    }

    pub fn set_cost(&mut self, j: usize, c: f64) {
        let v = self.structural[j];
        self.cost[v] = c;
        self.status = None;
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.cost[self.structural[j]]
    }

    pub fn value(&self, j: usize) -> f64 {
        self.x[self.structural[j]]
    }

    pub fn values(&self) -> Vec<f64> {
        self.structural.iter().map(|&v| self.x[v]).collect()
    }

    pub fn is_basic(&self, j: usize) -> bool {
        matches!(self.state[self.structural[j]], State::Basic(_))
    }

    /// Row activity `a_i·x`.
    pub fn row_activity(&self, i: usize) -> f64 {
        self.rhs[i] - self.x[self.slack[i]]
    }

    pub fn objective(&self) -> f64 {
        self.structural.iter().map(|&v| self.cost[v] * self.x[v]).sum()
    }

    /// Row duals `y = c_B B^{-1}`; the reduced cost of column `j` is `c_j - y·a_j`.
    pub fn duals(&self) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        self.btran(&cb)
    }

    pub fn reduced_costs(&self) -> Vec<f64> {
        let y = self.duals();
        self.structural.iter().map(|&v| self.cost[v] - dot_col(&self.cols[v], &y)).collect()
    }

    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for (yi, &b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    fn ftran(&self, col: &[(usize, f64)]) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for &(i, a) in col {
            for (k, o) in out.iter_mut().enumerate() {
                *o += a * self.binv[k * m + i];
            }
        }
        out
    }

    /// Recompute basic values from the nonbasic ones.
    fn compute_xb(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for v in 0..self.cols.len() {
            if !matches!(self.state[v], State::Basic(_)) && self.x[v] != 0.0 {
                for &(i, a) in &self.cols[v] {
                    r[i] -= a * self.x[v];
                }
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            let val: f64 = row.iter().zip(&r).map(|(b, ri)| b * ri).sum();
            self.x[self.basis[k]] = val;
        }
        self.dirty = false;
    }

    /// Rebuild B^{-1} from scratch by Gauss-Jordan elimination. Dependent basic
    /// columns are swapped for slacks of uncovered rows.
    fn refactor(&mut self) {
        let m = self.m;
        'retry: for _ in 0..=m {
            let mut a = vec![0.0; m * m];
            for (k, &v) in self.basis.iter().enumerate() {
                for &(i, val) in &self.cols[v] {
                    a[i * m + k] = val;
                }
            }
            let mut inv = identity(m);
            let mut perm: Vec<usize> = (0..m).collect();
            for k in 0..m {
                let mut p = k;
                let mut best = a[k * m + k].abs();
                for r in k + 1..m {
                    let val = a[r * m + k].abs();
                    if val > best {
                        best = val;
                        p = r;
                    }
                }
                if best < 1e-11 {
                    // Column k is dependent on earlier ones; replace it by the
                    // slack of a row that has not been pivoted on yet.
                    // Some uncovered row always has a nonbasic slack: there are
                    // m-k uncovered rows but fewer than m-k later positions.
                    let Some(row) = perm[k..]
                        .iter()
                        .copied()
                        .find(|&i| !matches!(self.state[self.slack[i]], State::Basic(_)))
                    else {
                        break 'retry;
                    };
                    let out = self.basis[k];
                    let s = self.slack[row];
                    let st = nonbasic_start(self.cost[out], self.lo[out], self.hi[out]);
                    self.state[out] = st;
                    self.x[out] = nonbasic_value(st, self.lo[out], self.hi[out]);
                    self.basis[k] = s;
                    self.state[s] = State::Basic(k);
                    log::debug!("refactor: replaced singular basic column with slack of row {row}");
                    continue 'retry;
                }
                if p != k {
                    for c in 0..m {
                        a.swap(k * m + c, p * m + c);
                        inv.swap(k * m + c, p * m + c);
                    }
                    perm.swap(k, p);
                }
                let piv = a[k * m + k];
                for c in 0..m {
                    a[k * m + c] /= piv;
                    inv[k * m + c] /= piv;
                }
                for r in 0..m {
                    if r == k {
                        continue;
                    }
                    let f = a[r * m + k];
                    if f != 0.0 {
                        for c in 0..m {
                            a[r * m + c] -= f * a[k * m + c];
                            inv[r * m + c] -= f * inv[k * m + c];
                        }
                    }
                }
            }
            self.binv = inv;
            self.since_refactor = 0;
            self.compute_xb();
            return;
        }
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let pr = alpha[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        for v in row_r.iter_mut() {
            *v /= pr;
        }
        for (k, chunk) in before.chunks_exact_mut(m).enumerate() {
            let f = alpha[k];
            if f != 0.0 {
                for (a, b) in chunk.iter_mut().zip(row_r.iter()) {
                    *a -= f * b;
                }
            }
        }
        for (k, chunk) in after.chunks_exact_mut(m).enumerate() {
            let f = alpha[r + 1 + k];
            if f != 0.0 {
                for (a, b) in chunk.iter_mut().zip(row_r.iter()) {
                    *a -= f * b;
                }
            }
        }
        self.since_refactor += 1;
    }

    fn refactor_due(&self) -> bool {
        self.since_refactor >= 100.max(self.m / 2)
    }

    fn basic_infeasibility(&self, v: usize) -> f64 {
        let x = self.x[v];
        if x < self.lo[v] - self.tol.primal {
            self.lo[v] - x
        } else if x > self.hi[v] + self.tol.primal {
            x - self.hi[v]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&v| self.basic_infeasibility(v) == 0.0)
    }

    fn reduced_cost_with(&self, v: usize, y: &[f64], phase1: bool) -> f64 {
        let c = if phase1 { 0.0 } else { self.cost[v] };
        c - dot_col(&self.cols[v], y)
    }

    fn dual_feasible(&self) -> bool {
        let y = self.duals();
        let t = self.tol.dual;
        (0..self.cols.len()).all(|v| {
            if self.lo[v] == self.hi[v] {
                return true;
            }
            let d = self.reduced_cost_with(v, &y, false);
            match self.state[v] {
                State::Basic(_) => true,
                State::Lower => d >= -t,
                State::Upper => d <= t,
                State::Zero => d.abs() <= t,
            }
        })
    }

    fn iteration_cap(&self) -> u64 {
        50 * (self.m + self.cols.len()) as u64 + 10_000
    }

    /// Optimise from the current basis.
    pub fn solve(&mut self) -> Result<LpStatus, LpError> {
        if self.dirty || self.refactor_due() {
            if self.refactor_due() {
                self.refactor();
            } else {
                self.compute_xb();
            }
        }
        let mut budget = self.iteration_cap();
        for attempt in 0..4 {
            let outcome = if self.primal_feasible() {
                self.primal(&mut budget)?
            } else if self.dual_feasible() {
                match self.dual(&mut budget)? {
                    Step::Limit => self.primal(&mut budget)?,
                    s => s,
                }
            } else {
                self.primal(&mut budget)?
            };
            match outcome {
                Step::Limit => return Err(LpError::IterationLimit),
                Step::Unbounded => {
                    self.status = Some(LpStatus::Unbounded);
                    return Ok(LpStatus::Unbounded);
                }
                Step::Infeasible | Step::Optimal => {
                    // Confirm against freshly computed values before reporting;
                    // refactor only once a check has failed.
                    if attempt > 0 {
                        self.refactor();
                    } else {
                        self.compute_xb();
                    }
                    let ok = match outcome {
                        Step::Optimal => self.primal_feasible() && self.dual_feasible(),
                        _ => !self.primal_feasible(),
                    };
                    if ok {
                        let st = if matches!(outcome, Step::Optimal) { LpStatus::Optimal } else { LpStatus::Infeasible };
                        self.status = Some(st);
                        return Ok(st);
                    }
                    log::debug!("simplex: verification failed, resuming (attempt {attempt})");
                }
            }
        }
        Err(LpError::NumericalFailure("simplex did not converge to a verified basis".into()))
    }

    fn nonbasic_candidates(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cols.len()).filter(move |&v| !matches!(self.state[v], State::Basic(_)) && self.lo[v] < self.hi[v])
    }

    fn primal(&mut self, budget: &mut u64) -> Result<Step, LpError> {
        let tol = self.tol;
        let mut degenerate = 0usize;
        let bland_after = 10 * (self.m + self.cols.len());
        loop {
            if *budget == 0 {
                return Ok(Step::Limit);
            }
            *budget -= 1;
            if self.refactor_due() {
                self.refactor();
            }
            let bland = degenerate > bland_after;
            let mut cb = vec![0.0; self.m];
            let mut phase1 = false;
            for (k, &v) in self.basis.iter().enumerate() {
                let x = self.x[v];
                if x < self.lo[v] - tol.primal {
                    cb[k] = -1.0;
                    phase1 = true;
                } else if x > self.hi[v] + tol.primal {
                    cb[k] = 1.0;
                    phase1 = true;
                }
            }
            if !phase1 {
                for (k, &v) in self.basis.iter().enumerate() {
                    cb[k] = self.cost[v];
                }
            }
            let y = self.btran(&cb);
            let mut enter: Option<(usize, f64, f64)> = None; // (var, dir, score)
            for v in self.nonbasic_candidates() {
                let d = self.reduced_cost_with(v, &y, phase1);
                let dir = match self.state[v] {
                    State::Lower if d < -tol.dual => 1.0,
                    State::Upper if d > tol.dual => -1.0,
                    State::Zero if d.abs() > tol.dual => -d.signum(),
                    _ => continue,
                };
                let score = d.abs();
                if bland {
                    enter = Some((v, dir, score));
                    break;
                }
                if enter.is_none_or(|e| score > e.2) {
                    enter = Some((v, dir, score));
                }
            }
            let Some((q, dir, _)) = enter else {
                return Ok(if phase1 { Step::Infeasible } else { Step::Optimal });
            };
            let alpha = self.ftran(&self.cols[q]);
            // Harris two-pass ratio test.
            let bounds_of = |s: &Self, v: usize| -> (f64, f64) {
                let x = s.x[v];
                if phase1 && x < s.lo[v] - tol.primal {
                    (-INF, s.lo[v])
                } else if phase1 && x > s.hi[v] + tol.primal {
                    (s.hi[v], INF)
                } else {
                    (s.lo[v], s.hi[v])
                }
            };
            let mut theta_max = INF;
            for (k, &a) in alpha.iter().enumerate() {
                let a = a * dir;
                if a.abs() < tol.pivot {
                    continue;
                }
                let v = self.basis[k];
                let (l, u) = bounds_of(self, v);
                let x = self.x[v];
                let t = if a > 0.0 {
                    if l.is_finite() { (x - l + tol.primal) / a } else { INF }
                } else if u.is_finite() {
                    (u - x + tol.primal) / -a
                } else {
                    INF
                };
                theta_max = theta_max.min(t);
            }
            let range = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64, f64)> = None; // (pos, ratio, |a|)
            if theta_max.is_finite() {
                for (k, &a) in alpha.iter().enumerate() {
                    let a = a * dir;
                    if a.abs() < tol.pivot {
                        continue;
                    }
                    let v = self.basis[k];
                    let (l, u) = bounds_of(self, v);
                    let x = self.x[v];
                    let t = if a > 0.0 {
                        if l.is_finite() { ((x - l) / a).max(0.0) } else { continue }
                    } else if u.is_finite() {
                        ((u - x) / -a).max(0.0)
                    } else {
                        continue;
                    };
                    if t > theta_max {
                        continue;
                    }
                    let better = match leave {
                        None => true,
                        Some((pk, pt, pa)) => {
                            if bland {
                                t < pt - 1e-12 || (t <= pt + 1e-12 && v < self.basis[pk])
                            } else {
                                a.abs() > pa
                            }
                        }
                    };
                    if better {
                        leave = Some((k, t, a.abs()));
                    }
                }
            }
            let step_to_flip = range.is_finite() && leave.is_none_or(|l| range <= l.1);
            if leave.is_none() && !range.is_finite() {
                if phase1 {
                    return Err(LpError::NumericalFailure("phase 1 ratio test found no bound".into()));
                }
                return Ok(Step::Unbounded);
            }
            self.iterations += 1;
            if step_to_flip {
                // Entering variable runs to its opposite bound: no basis change.
                let t = range;
                for (k, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        self.x[self.basis[k]] -= t * dir * a;
                    }
                }
                let st = if dir > 0.0 { State::Upper } else { State::Lower };
                self.state[q] = st;
                self.x[q] = nonbasic_value(st, self.lo[q], self.hi[q]);
                degenerate = 0;
                continue;
            }
            let (r, t, _) = leave.unwrap();
            if t < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let out = self.basis[r];
            let a = alpha[r] * dir;
            let (l, u) = bounds_of(self, out);
            for (k, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[k]] -= t * dir * a;
                }
            }
            self.x[q] += t * dir;
            let st = if a > 0.0 {
                if l == self.lo[out] { State::Lower } else { State::Upper }
            } else if u == self.hi[out] {
                State::Upper
            } else {
                State::Lower
            };
            self.state[out] = st;
            self.x[out] = nonbasic_value(st, self.lo[out], self.hi[out]);
            self.basis[r] = q;
            self.state[q] = State::Basic(r);
            self.pivot(r, &alpha);
        }
    }

    fn dual(&mut self, budget: &mut u64) -> Result<Step, LpError> {
        let tol = self.tol;
        let mut degenerate = 0usize;
        let bland_after = 10 * (self.m + self.cols.len());
        loop {
            if *budget == 0 {
                return Ok(Step::Limit);
            }
            *budget -= 1;
            if self.refactor_due() {
                self.refactor();
            }
            let bland = degenerate > bland_after;
            let mut leave: Option<(usize, f64)> = None;
            for (k, &v) in self.basis.iter().enumerate() {
                let inf = self.basic_infeasibility(v);
                if inf > 0.0 {
                    let better = match leave {
                        None => true,
                        Some((pk, pi)) => {
                            if bland { v < self.basis[pk] } else { inf > pi }
                        }
                    };
                    if better {
                        leave = Some((k, inf));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Step::Optimal);
            };
            let out = self.basis[r];
            let below = self.x[out] < self.lo[out];
            let target = if below { self.lo[out] } else { self.hi[out] };
            let m = self.m;
            let rho: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let y = self.duals();
            // Candidates: (var, alpha_r, |d|)
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for v in self.nonbasic_candidates() {
                let ar = dot_col(&self.cols[v], &rho);
                if ar.abs() < tol.pivot {
                    continue;
                }
                // x_out changes by -ar * dx_v; moving toward target needs
                // sign(-ar*dx) = +1 when below, -1 when above.
                let want = if below { -1.0 } else { 1.0 };
                let ok = match self.state[v] {
                    State::Lower => ar * want > 0.0,
                    State::Upper => ar * want < 0.0,
                    State::Zero => true,
                    State::Basic(_) => false,
                };
                if !ok {
                    continue;
                }
                let d = self.reduced_cost_with(v, &y, false);
                let dabs = match self.state[v] {
                    State::Lower => d.max(0.0),
                    State::Upper => (-d).max(0.0),
                    _ => d.abs(),
                };
                cands.push((v, ar, dabs));
            }
            if cands.is_empty() {
                return Ok(Step::Infeasible);
            }
            let theta_max = cands
                .iter()
                .map(|&(_, a, d)| (d + tol.dual) / a.abs())
                .fold(INF, f64::min);
            let mut best: Option<(usize, f64, f64)> = None;
            for &(v, a, d) in &cands {
                let t = d / a.abs();
                if t > theta_max {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bv, ba, bt)) => {
                        if bland {
                            t < bt - 1e-12 || (t <= bt + 1e-12 && v < bv)
                        } else {
                            a.abs() > ba.abs()
                        }
                    }
                };
                if better {
                    best = Some((v, a, t));
                }
            }
            let (q, _, t) = best.unwrap();
            if t < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            let alpha = self.ftran(&self.cols[q]);
            let delta = (self.x[out] - target) / alpha[r];
            for (k, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.basis[k]] -= delta * a;
                }
            }
            self.x[q] += delta;
            let st = if below { State::Lower } else { State::Upper };
            self.state[out] = st;
            self.x[out] = target;
            self.basis[r] = q;
            self.state[q] = State::Basic(r);
            self.iterations += 1;
            self.pivot(r, &alpha);
        }
    }
}

fn identity(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    v
}

fn dot_col(col: &[(usize, f64)], y: &[f64]) -> f64 {
    col.iter().map(|&(i, a)| a * y[i]).sum()
}

/// Nonbasic resting place that keeps the reduced cost sign dual feasible
/// when all slacks are basic.
fn nonbasic_start(cost: f64, lo: f64, hi: f64) -> State {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            if cost < 0.0 { State::Upper } else { State::Lower }
        }
        (true, false) => State::Lower,
        (false, true) => State::Upper,
        (false, false) => State::Zero,
    }
}

fn nonbasic_value(st: State, lo: f64, hi: f64) -> f64 {
    match st {
        State::Lower => lo,
        State::Upper => hi,
        _ => 0.0,
    }
}
