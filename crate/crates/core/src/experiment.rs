//! Batch runner: a grid of generator settings × seeds × methods, one CSV row
//! per (setting, seed, method), plus a separate summary pass over raw rows.
//!
//! CSV columns, in order: n, delta, delta_e, q, seed, method, status,
//! objective, num_lrus, iterations, nodes, wall_ms, cycle_free,
//! totally_balanced, connected, integral, beta, delta_pi, design, error.
//!
//! - `status` is `ok`, `limit` (a search limit stopped the method; objective
//!   is the incumbent if any) or `error`.
//! - `iterations` counts master solves for colgen and LP iterations for blp.
//! - `beta` = (π_blp − π_colgen)/π_colgen on the colgen and blp rows when both
//!   produced a design.
//! - `delta_pi` = (π* − π_c*)/π_c* on the clru row, with π* from colgen (or
//!   the oracle when colgen did not run).
//! - `design` lists LRUs in canonical order, members by label separated by
//!   spaces and LRUs by `|`; cover designs write each LRU as `failure/replacement`.
//! - `wall_ms` is the only column that varies between identical runs.

use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use lru_lp::MilpOptions;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blp::{build_blp, solve_blp, BlpStatus};
use crate::clru::{relative_gap, solve_clru, ClruMode, EXHAUSTIVE_CAP};
use crate::colgen::{solve_lru_design_colgen, ColgenOptions};
use crate::error::{Error, Result};
use crate::generator::{generate, GeneratorConfig};
use crate::instance::{SuccessorSets, SystemInstance};
use crate::sets::{sort_canonical, VertexSet};
use crate::oracle::{oracle_optimal_design, DESIGN_CAP};

/// Environment variable holding the worker count of the batch runner.
pub const WORKERS_ENV: &str = "LRU_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Colgen,
    Blp,
    Oracle,
    Clru,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Colgen, Method::Blp, Method::Oracle, Method::Clru];

    pub fn name(self) -> &'static str {
        match self {
            Method::Colgen => "colgen",
            Method::Blp => "blp",
            Method::Oracle => "oracle",
            Method::Clru => "clru",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown method {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub delta: f64,
    pub delta_e: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub grid: Vec<GridPoint>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub colgen: ColgenOptions,
    pub blp: MilpOptions,
    pub clru_mode: ClruMode,
    /// Worker threads; `None` reads [`WORKERS_ENV`], falling back to rayon's default.
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(grid: Vec<GridPoint>, seeds: Vec<u64>, methods: Vec<Method>) -> Self {
        ExperimentSpec {
            grid,
            seeds,
            methods,
            colgen: ColgenOptions { certify: true, ..ColgenOptions::default() },
            blp: MilpOptions::default(),
            clru_mode: ClruMode::Exhaustive,
            workers: None,
        }
    }

    /// Cartesian grid over the four generator parameters.
    pub fn cartesian(ns: &[usize], deltas: &[f64], delta_es: &[f64], qs: &[f64]) -> Vec<GridPoint> {
        let mut grid = Vec::new();
        for &n in ns {
            for &delta in deltas {
                for &delta_e in delta_es {
                    for &q in qs {
                        grid.push(GridPoint { n, delta, delta_e, q });
                    }
                }
            }
        }
        grid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub n: usize,
    pub delta: f64,
    pub delta_e: f64,
    pub q: f64,
    pub seed: u64,
    pub method: Method,
    pub status: String,
    pub objective: Option<f64>,
    pub num_lrus: Option<usize>,
    pub iterations: Option<u64>,
    pub nodes: Option<u64>,
    pub wall_ms: f64,
    pub cycle_free: Option<bool>,
    pub totally_balanced: Option<bool>,
    pub connected: Option<bool>,
    pub integral: Option<bool>,
    pub beta: Option<f64>,
    pub delta_pi: Option<f64>,
    pub design: Option<String>,
    pub error: Option<String>,
}

impl ExperimentResult {
    fn blank(p: &GridPoint, seed: u64, method: Method) -> Self {
        ExperimentResult {
            n: p.n,
            delta: p.delta,
            delta_e: p.delta_e,
            q: p.q,
            seed,
            method,
            status: "ok".into(),
            objective: None,
            num_lrus: None,
            iterations: None,
            nodes: None,
            wall_ms: 0.0,
            cycle_free: None,
            totally_balanced: None,
            connected: None,
            integral: None,
            beta: None,
            delta_pi: None,
            design: None,
            error: None,
        }
    }

    fn fail(&mut self, e: &Error) {
        self.status = if e.is_limit() { "limit" } else { "error" }.into();
        self.error = Some(e.to_string());
    }
}

fn workers(spec: &ExperimentSpec) -> Option<usize> {
    spec.workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|s| s.trim().parse().ok()))
        .filter(|&w| w > 0)
}

/// Run every (grid point, seed) pair with every method. Rows come back
/// ordered by (grid position, seed, method) whatever the completion order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentResult>> {
    for p in &spec.grid {
        GeneratorConfig::new(p.n, p.delta, p.delta_e, p.q, 0).check()?;
    }
    let mut methods = spec.methods.clone();
    methods.sort();
    methods.dedup();
    let jobs: Vec<(usize, u64)> =
        (0..spec.grid.len()).flat_map(|g| spec.seeds.iter().map(move |&s| (g, s))).collect();
    let run = || jobs.par_iter().map(|&(g, seed)| run_one(spec, &spec.grid[g], seed, &methods)).collect::<Vec<_>>();
    let groups = match workers(spec) {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InfeasibleConfig(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(groups.into_iter().flatten().collect())
}

fn run_one(spec: &ExperimentSpec, p: &GridPoint, seed: u64, methods: &[Method]) -> Vec<ExperimentResult> {
    let inst = match generate(&GeneratorConfig::new(p.n, p.delta, p.delta_e, p.q, seed)) {
        Ok(i) => i,
        Err(e) => {
            return methods
                .iter()
                .map(|&m| {
                    let mut r = ExperimentResult::blank(p, seed, m);
                    r.fail(&e);
                    r
                })
                .collect()
        }
    };
    let h = SuccessorSets::compute(&inst);
    let mut rows: Vec<ExperimentResult> = methods
        .iter()
        .map(|&m| {
            let mut r = ExperimentResult::blank(p, seed, m);
            let started = Instant::now();
            let res: Result<()> = (|| {
                match m {
                    Method::Colgen => {
                        let out = solve_lru_design_colgen(&inst, &h, &spec.colgen)?;
                        if out.stop.is_premature() {
                            r.status = "limit".into();
                        }
                        r.iterations = Some(out.iterations as u64);
                        r.num_lrus = out.design.as_ref().map(|d| d.len());
                        r.objective = Some(out.design.as_ref().map_or(out.objective, |d| d.pi));
                        r.design = out.design.as_ref().map(|d| design_string(&inst, &d.sets()));
                        if let Some(c) = out.certificate {
                            r.cycle_free = Some(c.cycle_free);
                            r.totally_balanced = Some(c.totally_balanced);
                            r.connected = Some(c.connected);
                            r.integral = Some(c.integral);
                        }
                    }
                    Method::Blp => {
                        let enc = build_blp(&inst, &h, true);
                        let out = solve_blp(&inst, &h, &enc, &spec.blp)?;
                        if out.status == BlpStatus::LimitReached {
                            r.status = "limit".into();
                        }
                        r.iterations = Some(out.lp_iterations);
                        r.nodes = Some(out.nodes);
                        r.objective = out.design.as_ref().map(|d| d.pi);
                        r.num_lrus = out.design.as_ref().map(|d| d.len());
                        r.design = out.design.as_ref().map(|d| design_string(&inst, &d.sets()));
                    }
                    Method::Oracle => {
                        let d = oracle_optimal_design(&inst, &h, DESIGN_CAP)?;
                        r.objective = Some(d.pi);
                        r.num_lrus = Some(d.len());
                        r.design = Some(design_string(&inst, &d.sets()));
                    }
                    Method::Clru => {
                        let d = solve_clru(&inst, &h, spec.clru_mode, EXHAUSTIVE_CAP)?;
                        r.objective = Some(d.pi);
                        r.num_lrus = Some(d.lrus.len());
                        let parts: Vec<String> = d
                            .lrus
                            .iter()
                            .map(|l| format!("{}/{}", inst.labels_of(l.failure).join(" "), inst.labels_of(l.replacement).join(" ")))
                            .collect();
                        r.design = Some(parts.join("|"));
                    }
                }
                Ok(())
            })();
            if let Err(e) = res {
                r.fail(&e);
            }
            r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            r
        })
        .collect();

    let ok = |m: Method| rows.iter().find(|r| r.method == m && r.status == "ok").and_then(|r| r.objective);
    let beta = match (ok(Method::Blp), ok(Method::Colgen)) {
        (Some(b), Some(c)) => Some((b - c) / c),
        _ => None,
    };
    let cover = ok(Method::Clru);
    let partition = ok(Method::Colgen).or(ok(Method::Oracle));
    for r in &mut rows {
        if matches!(r.method, Method::Colgen | Method::Blp) {
            r.beta = beta;
        }
        if r.method == Method::Clru {
            r.delta_pi = match (partition, cover) {
                (Some(p), Some(c)) => Some(relative_gap(p, c)),
                _ => None,
            };
        }
    }
    rows
}

/// Canonical text form of a partition, as written to the `design` column.
pub fn design_string(inst: &SystemInstance, sets: &[VertexSet]) -> String {
    let mut sorted = sets.to_vec();
    sort_canonical(&mut sorted);
    sorted.iter().map(|&q| inst.labels_of(q).join(" ")).collect::<Vec<_>>().join("|")
}

pub fn write_csv<W: Write>(rows: &[ExperimentResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ExperimentResult>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// The CSV with wall times blanked, for byte-level determinism checks.
pub fn csv_without_wall_time(rows: &[ExperimentResult]) -> Result<Vec<u8>> {
    let blanked: Vec<ExperimentResult> = rows.iter().map(|r| ExperimentResult { wall_ms: 0.0, ..r.clone() }).collect();
    let mut buf = Vec::new();
    write_csv(&blanked, &mut buf)?;
    Ok(buf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub delta: f64,
    pub delta_e: f64,
    pub q: f64,
    pub method: Method,
    pub runs: usize,
    pub ok: usize,
    pub mean_objective: Option<f64>,
    pub median_objective: Option<f64>,
    pub mean_num_lrus: Option<f64>,
    pub median_num_lrus: Option<f64>,
    pub mean_wall_ms: Option<f64>,
    pub median_wall_ms: Option<f64>,
    pub mean_beta: Option<f64>,
    pub max_beta: Option<f64>,
    pub mean_delta_pi: Option<f64>,
    pub median_delta_pi: Option<f64>,
    pub min_delta_pi: Option<f64>,
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[k] } else { (v[k - 1] + v[k]) / 2.0 })
}

/// Means and medians per (setting, method) over rows with status `ok`,
/// in order of first appearance.
pub fn summarize(rows: &[ExperimentResult]) -> Vec<SummaryRow> {
    let key = |r: &ExperimentResult| (r.n, r.delta.to_bits(), r.delta_e.to_bits(), r.q.to_bits(), r.method);
    let mut keys = Vec::new();
    for r in rows {
        if !keys.contains(&key(r)) {
            keys.push(key(r));
        }
    }
    keys.into_iter()
        .map(|k| {
            let group: Vec<&ExperimentResult> = rows.iter().filter(|r| key(r) == k).collect();
            let good: Vec<&ExperimentResult> = group.iter().copied().filter(|r| r.status == "ok").collect();
            let col = |f: &dyn Fn(&ExperimentResult) -> Option<f64>| good.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let obj = col(&|r| r.objective);
            let lrus = col(&|r| r.num_lrus.map(|x| x as f64));
            let wall = col(&|r| Some(r.wall_ms));
            let beta = col(&|r| r.beta);
            let dpi = col(&|r| r.delta_pi);
            let first = group[0];
            SummaryRow {
                n: first.n,
                delta: first.delta,
                delta_e: first.delta_e,
                q: first.q,
                method: first.method,
                runs: group.len(),
                ok: good.len(),
                mean_objective: mean(&obj),
                median_objective: median(&obj),
                mean_num_lrus: mean(&lrus),
                median_num_lrus: median(&lrus),
                mean_wall_ms: mean(&wall),
                median_wall_ms: median(&wall),
                mean_beta: mean(&beta),
                max_beta: beta.iter().copied().reduce(f64::max),
                mean_delta_pi: mean(&dpi),
                median_delta_pi: median(&dpi),
                min_delta_pi: dpi.iter().copied().reduce(f64::min),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

