//! Solver-agnostic conic programs and the backends that solve them.

mod clarabel_backend;
mod program;
mod vertex_lp;

use serde::{Deserialize, Serialize};

pub use program::{
    linear_combination, validate_program, AffineExpr, ConeBlock, ConicProgram, EqualityBlock, ProgramBuilder,
    ProgramShape, Var,
};

use crate::error::{Error, Result};

/// Environment variable selecting the backend (`clarabel` or `vertex`).
pub const SOLVER_ENV: &str = "CONDPORT_SOLVER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    /// One vector per equality block.
    pub dual_equalities: Vec<Vec<f64>>,
    /// One vector per cone block; PSD duals are full row-major matrices.
    pub dual_cones: Vec<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
    /// Set when the backend stopped at relaxed tolerances.
    pub reduced_accuracy: bool,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Clarabel,
    /// Vertex enumeration; small bounded LPs only.
    Vertex,
}

impl Backend {
    /// Reads [`SOLVER_ENV`]; defaults to Clarabel.
    pub fn from_env() -> Result<Backend> {
        match std::env::var(SOLVER_ENV) {
            Err(_) => Ok(Backend::Clarabel),
            Ok(s) => s.parse(),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Backend> {
        match s.trim().to_ascii_lowercase().as_str() {
            "" | "clarabel" => Ok(Backend::Clarabel),
            "vertex" => Ok(Backend::Vertex),
            other => Err(Error::InvalidParameter(format!("unknown solver backend {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: u32,
    /// `None` reads the backend from the environment.
    pub backend: Option<Backend>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 200,
            backend: None,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions {
            tol,
            ..Default::default()
        }
    }
}

/// Validates and solves `p`. Non-optimal statuses are returned, not raised.
pub fn solve_conic(p: &ConicProgram, opts: &SolveOptions) -> Result<Solution> {
    validate_program(p).map_err(Error::InvalidProgram)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let backend = match opts.backend {
        Some(b) => b,
        None => Backend::from_env()?,
    };
    let sol = match backend {
        Backend::Clarabel => clarabel_backend::solve(p, opts)?,
        Backend::Vertex => vertex_lp::solve(p, opts)?,
    };
    log::debug!(
        "solved {} vars with {:?}: {:?} obj={} iters={}",
        p.num_vars,
        backend,
        sol.status,
        sol.objective,
        sol.iterations
    );
    Ok(sol)
}

/// Like [`solve_conic`] but turns any non-optimal status into
/// [`Error::Solver`] carrying the program.
pub fn solve_optimal(p: &ConicProgram, opts: &SolveOptions) -> Result<Solution> {
    let sol = solve_conic(p, opts)?;
    if sol.is_optimal() {
        Ok(sol)
    } else {
        Err(Error::Solver {
            status: sol.status,
            program: Box::new(p.clone()),
        })
    }
}
