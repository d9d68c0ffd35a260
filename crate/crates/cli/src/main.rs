use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lru_core::blp::{build_blp, solve_blp, BlpStatus};
use lru_core::clru::{relative_gap, ClruMode, EXHAUSTIVE_CAP};
use lru_core::experiment::{read_csv, summarize, write_csv, write_summary_csv, ExperimentSpec, Method};
use lru_core::oracle::{oracle_optimal_design, DESIGN_CAP};
use lru_core::structure::certify;
use lru_core::{
    design_cost, fixture, generate, run_experiment, solve_clru, solve_lru_design_colgen, ColgenOptions, DesignJson,
    Error, GeneratorConfig, PricingMethod, SuccessorSets, SystemInstance,
};
use lru_lp::MilpOptions;
use serde_json::{json, Value};

/// LRU design solvers: optimal grouping of parts into line replaceable units.
#[derive(Parser)]
#[command(name = "lru", version)]
struct Cli {
    /// Seed for anything random (generation, experiment seed base).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        n: usize,
        /// |E| = delta·|V|.
        #[arg(long, default_value_t = 3.0)]
        delta: f64,
        /// |A| = delta_e·|E|.
        #[arg(long, default_value_t = 1.0)]
        delta_e: f64,
        /// Edge weight multiplier.
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for an optimal LRU design.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMethod::Colgen)]
        method: SolveMethod,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Attach structural certificates of the final support (colgen).
        #[arg(long)]
        certify: bool,
        /// Use the binary program without symmetry breaking (blp).
        #[arg(long)]
        fidelity: bool,
        #[arg(long, value_enum, default_value_t = Pricing::Enumeration)]
        pricing: Pricing,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// Solve the cover variant (overlapping replacement sets).
    Clru {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CoverMode::Exhaustive)]
        mode: CoverMode,
        /// Instance size limit of the exhaustive mode.
        #[arg(long, default_value_t = EXHAUSTIVE_CAP)]
        cap: usize,
        /// Also solve the partition problem and report the relative gap.
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate an instance and, optionally, evaluate a design against it.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        design: Option<PathBuf>,
    },
    /// Print a bundled instance.
    Fixture {
        #[arg(value_parser = ["laptop", "chain", "cycle"])]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a batch over a parameter grid and write raw CSV rows.
    Experiment {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [3.0])]
        delta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
        delta_e: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0])]
        q: Vec<f64>,
        /// Number of seeds per setting, starting at --seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "colgen")]
        methods: Vec<String>,
        #[arg(long)]
        blp_node_limit: Option<u64>,
        /// Seconds per blp run; makes rows depend on machine speed.
        #[arg(long)]
        blp_time_limit: Option<f64>,
        #[arg(long, env = "LRU_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Means and medians per setting and method from a raw experiment CSV.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Colgen,
    Blp,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pricing {
    Enumeration,
    Milp,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoverMode {
    Exhaustive,
    FullPower,
    Milp,
    Decomposition,
}

/// Outcome of a command that ran but stopped on a search limit.
struct Limited;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Limited)) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(err) if err.is_validation() => ExitCode::from(2),
                Some(err) if err.is_limit() => ExitCode::from(3),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(out: Option<&Path>, v: &Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load(path: &Path) -> Result<SystemInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(SystemInstance::from_json_str(&text)?)
}

fn secs(s: Option<f64>) -> Option<Duration> {
    s.map(Duration::from_secs_f64)
}

fn run(cli: Cli) -> Result<Option<Limited>> {
    match cli.cmd {
        Cmd::Gen { n, delta, delta_e, q, out } => {
            let inst = generate(&GeneratorConfig::new(n, delta, delta_e, q, cli.seed))?;
            let mut w = sink(out.as_deref())?;
            writeln!(w, "{}", inst.to_json_string())?;
            w.flush()?;
            Ok(None)
        }
        Cmd::Fixture { name, out } => {
            let inst = fixture(&name)?;
            let mut w = sink(out.as_deref())?;
            writeln!(w, "{}", inst.to_json_string())?;
            w.flush()?;
            Ok(None)
        }
        Cmd::Solve { input, method, out, certify: want_cert, fidelity, pricing, max_iterations, time_limit, node_limit } => {
            let inst = load(&input)?;
            let h = SuccessorSets::compute(&inst);
            let started = Instant::now();
            let (value, limited) = match method {
                SolveMethod::Colgen => {
                    let opts = ColgenOptions {
                        pricing: match pricing {
                            Pricing::Enumeration => PricingMethod::Enumeration,
                            Pricing::Milp => PricingMethod::Milp,
                            Pricing::Oracle => PricingMethod::Oracle,
                        },
                        max_iterations,
                        time_limit: secs(time_limit),
                        certify: want_cert,
                        ..ColgenOptions::default()
                    };
                    let res = solve_lru_design_colgen(&inst, &h, &opts)?;
                    for w in &res.warnings {
                        log::warn!("{w}");
                    }
                    let limited = res.stop.is_premature();
                    let support: Vec<Value> = res
                        .support
                        .iter()
                        .map(|&(q, x)| json!({ "members": inst.labels_of(q), "x": x }))
                        .collect();
                    let v = json!({
                        "method": "colgen",
                        "status": if limited { "limit" } else { "optimal" },
                        "stop": res.stop,
                        "objective": res.objective,
                        "design": res.design.as_ref().map(|d| d.to_json(&inst)),
                        "support": support,
                        "iterations": res.iterations,
                        "columns": res.columns,
                        "certificate": res.certificate,
                        "warnings": res.warnings,
                        "wall_ms": started.elapsed().as_secs_f64() * 1e3,
                    });
                    (v, limited)
                }
                SolveMethod::Blp => {
                    let enc = build_blp(&inst, &h, !fidelity);
                    let opts = MilpOptions { node_limit, time_limit: secs(time_limit), ..MilpOptions::default() };
                    let res = solve_blp(&inst, &h, &enc, &opts)?;
                    let limited = res.status == BlpStatus::LimitReached;
                    let v = json!({
                        "method": "blp",
                        "status": if limited { "limit" } else { "optimal" },
                        "symmetry_breaking": !fidelity,
                        "objective": res.objective,
                        "bound": res.bound,
                        "design": res.design.as_ref().map(|d| d.to_json(&inst)),
                        "nodes": res.nodes,
                        "lp_iterations": res.lp_iterations,
                        "wall_ms": res.wall.as_secs_f64() * 1e3,
                    });
                    (v, limited)
                }
                SolveMethod::Oracle => {
                    let d = oracle_optimal_design(&inst, &h, DESIGN_CAP)?;
                    let v = json!({
                        "method": "oracle",
                        "status": "optimal",
                        "objective": d.pi,
                        "design": d.to_json(&inst),
                        "wall_ms": started.elapsed().as_secs_f64() * 1e3,
                    });
                    (v, false)
                }
            };
            emit(out.as_deref(), &value)?;
            Ok(limited.then_some(Limited))
        }
        Cmd::Clru { input, mode, cap, compare, out } => {
            let inst = load(&input)?;
            let h = SuccessorSets::compute(&inst);
            let mode = match mode {
                CoverMode::Exhaustive => ClruMode::Exhaustive,
                CoverMode::FullPower => ClruMode::FullPower,
                CoverMode::Milp => ClruMode::Milp,
                CoverMode::Decomposition => ClruMode::Decomposition,
            };
            let d = solve_clru(&inst, &h, mode, cap)?;
            let mut v = json!({ "mode": mode, "cover": d.to_json(&inst) });
            if compare {
                let part = solve_lru_design_colgen(&inst, &h, &ColgenOptions::default())?;
                let pi = part.design.as_ref().map_or(part.objective, |p| p.pi);
                v["partition_pi"] = json!(pi);
                v["delta_pi"] = json!(relative_gap(pi, d.pi));
            }
            emit(out.as_deref(), &v)?;
            Ok(None)
        }
        Cmd::Check { input, design } => {
            let inst = load(&input)?;
            let h = SuccessorSets::compute(&inst);
            let comps = inst.connected_components().len();
            let mut v = json!({
                "valid": true,
                "vertices": inst.num_vertices(),
                "edges": inst.num_edges(),
                "arcs": inst.arcs().len(),
                "components": comps,
            });
            if let Some(path) = design {
                let file = File::open(&path).with_context(|| format!("reading {}", path.display()))?;
                let mut raw: Value = serde_json::from_reader(BufReader::new(file)).map_err(Error::from)?;
                // accept `solve` output as well as a bare design
                if let Some(inner) = raw.get_mut("design") {
                    raw = inner.take();
                }
                let dj: DesignJson = serde_json::from_value(raw).map_err(Error::from)?;
                let sets = dj.sets(&inst)?;
                let d = design_cost(&inst, &h, &sets)?;
                let cols: Vec<_> = sets.iter().map(|&q| (q, 1.0)).collect();
                let cert = certify(&inst, &cols);
                v["design"] = serde_json::to_value(d.to_json(&inst))?;
                v["pi"] = json!(d.pi);
                v["stated_pi_matches"] = json!((dj.pi - d.pi).abs() <= 1e-9 * d.pi.abs().max(1.0));
                v["connected"] = json!(cert.connected);
            }
            emit(None, &v)?;
            Ok(None)
        }
        Cmd::Experiment {
            n,
            delta,
            delta_e,
            q,
            seeds,
            methods,
            blp_node_limit,
            blp_time_limit,
            workers,
            out,
        } => {
            let methods = methods
                .iter()
                .map(|m| m.parse::<Method>().map_err(Error::InfeasibleConfig))
                .collect::<Result<Vec<_>, _>>()?;
            let grid = ExperimentSpec::cartesian(&n, &delta, &delta_e, &q);
            let mut spec = ExperimentSpec::new(grid, (cli.seed..cli.seed + seeds).collect(), methods);
            spec.blp.node_limit = blp_node_limit;
            spec.blp.time_limit = secs(blp_time_limit);
            spec.workers = workers;
            let rows = run_experiment(&spec)?;
            write_csv(&rows, sink(out.as_deref())?)?;
            Ok(None)
        }
        Cmd::Summarize { input, out } => {
            let file = File::open(&input).with_context(|| format!("reading {}", input.display()))?;
            let rows = read_csv(BufReader::new(file))?;
            write_summary_csv(&summarize(&rows), sink(out.as_deref())?)?;
            Ok(None)
        }
    }
}
