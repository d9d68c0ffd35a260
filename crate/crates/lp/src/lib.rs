//! Small, dependency-free LP and binary-program solvers.
//!
//! [`Simplex`] is a bounded revised simplex that supports warm-started
//! re-optimisation after adding columns, adding or removing rows and changing
//! bounds. [`solve_milp`] runs best-first branch and bound on top of it.

mod milp;
mod model;
mod simplex;

pub use milp::{solve_milp, MilpModel, MilpOptions, MilpSolution, MilpStatus};
pub use model::{LpModel, Row, Sense};
pub use simplex::{LpStatus, Simplex, Tolerances};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal values (meaningful only when optimal).
    pub x: Vec<f64>,
    /// Row duals; reduced cost of column `j` is `c_j - Σ_i y_i a_ij`.
    pub duals: Vec<f64>,
    pub objective: f64,
}

/// Solve an LP from a cold start.
pub fn solve_lp(lp: &LpModel) -> Result<LpSolution, LpError> {
    let mut s = Simplex::new(lp)?;
    let status = s.solve()?;
    let objective = match status {
        LpStatus::Optimal => s.objective(),
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => f64::NEG_INFINITY,
    };
    Ok(LpSolution { status, x: s.values(), duals: s.duals(), objective })
}
