//! Tractable conic reformulations of the worst-case conditional loss and
//! the allocation problems built on them.

mod certificate;
mod fiber;
mod infty;
mod regime;
mod singleton;
mod spec;
mod tslp;

use serde::{Deserialize, Serialize};

pub use certificate::{CertLayout, DualCertificate};
pub use fiber::{build_cvar_fiber, build_fiber, build_mv_fiber};
pub use infty::{build_infty, build_mv_infty, infty_vstar};
pub use regime::{reduce_null_eps, route, uninformative_sup, NullEpsReduction, Route, UninformativeRegime};
pub use singleton::{build_cvar_singleton, build_mv_singleton, build_singleton};
pub use spec::ProblemSpec;
pub use tslp::{build_cvar_tslp, Polytope, RecourseSpec};

use crate::conic::{solve_optimal, AffineExpr, ConicProgram, ProgramBuilder, SolveOptions};
use crate::error::{Error, Result};
use crate::types::{Allocation, FeasibleSet, Transport};

/// Whether (α, β) are decision variables or frozen data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decision {
    Variable,
    Fixed { alpha: Vec<f64>, beta: f64 },
}

/// Variable positions needed to read results back out of a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub alpha: Option<Vec<usize>>,
    pub beta: Option<usize>,
    pub cert: CertLayout,
}

/// A built program together with its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formulation {
    pub program: ConicProgram,
    pub layout: Layout,
}

impl Formulation {
    pub fn alpha(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.layout.alpha.as_ref().map(|idx| idx.iter().map(|&i| x[i]).collect())
    }

    pub fn beta(&self, x: &[f64]) -> Option<f64> {
        self.layout.beta.map(|i| x[i])
    }

    pub fn certificate(&self, x: &[f64]) -> DualCertificate {
        self.layout.cert.extract(x)
    }
}

pub(crate) struct AlphaBeta {
    pub alpha: Vec<AffineExpr>,
    pub beta: AffineExpr,
    pub alpha_idx: Option<Vec<usize>>,
    pub beta_idx: Option<usize>,
}

/// Declares α and β (or embeds them as constants) and adds 𝒜 when α is free.
pub(crate) fn decision_vars(b: &mut ProgramBuilder, d: &Decision, feasible: &FeasibleSet) -> Result<AlphaBeta> {
    let m = feasible.m();
    match d {
        Decision::Variable => {
            let a = b.vars("alpha", m);
            let beta = b.var("beta");
            add_feasible(b, &a.iter().map(|&v| v.into()).collect::<Vec<_>>(), feasible);
            Ok(AlphaBeta {
                alpha: a.iter().map(|&v| v.into()).collect(),
                beta: beta.into(),
                alpha_idx: Some(a.iter().map(|v| v.0).collect()),
                beta_idx: Some(beta.0),
            })
        }
        Decision::Fixed { alpha, beta } => {
            if alpha.len() != m {
                return Err(Error::Dimension(format!("alpha has {} entries, expected {m}", alpha.len())));
            }
            if alpha.iter().any(|v| !v.is_finite()) || !beta.is_finite() {
                return Err(Error::InvalidParameter("fixed alpha and beta must be finite".into()));
            }
            Ok(AlphaBeta {
                alpha: alpha.iter().map(|&v| AffineExpr::constant(v)).collect(),
                beta: AffineExpr::constant(*beta),
                alpha_idx: None,
                beta_idx: None,
            })
        }
    }
}

pub(crate) fn add_feasible(b: &mut ProgramBuilder, alpha: &[AffineExpr], f: &FeasibleSet) {
    let mut rows = Vec::new();
    let mut pinned = Vec::new();
    for (j, a) in alpha.iter().enumerate() {
        if !f.tradable()[j] {
            pinned.push(a.clone());
            continue;
        }
        if f.lower()[j].is_finite() {
            rows.push(a.clone().add_const(-f.lower()[j]));
        }
        if f.upper()[j].is_finite() {
            rows.push(-a.clone() + AffineExpr::constant(f.upper()[j]));
        }
    }
    b.nonneg("alpha_bounds", rows);
    b.eq("alpha_untradable", pinned);
    if f.budget() {
        let sum = alpha.iter().fold(AffineExpr::constant(-1.0), |acc, a| acc + a.clone());
        b.eq("alpha_budget", vec![sum]);
    }
}

/// ŷᵀα as an affine expression.
pub(crate) fn dot_expr(y: &[f64], alpha: &[AffineExpr]) -> AffineExpr {
    crate::conic::linear_combination(y, alpha)
}

/// Builds the program matching the spec's regime. ε = 0 problems are
/// reduced to ε̲ first; uninformative regimes are errors here.
pub fn build_program(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    match route(spec)? {
        Route::Singleton => build_singleton(spec, decision),
        Route::Fiber => build_fiber(spec, decision),
        Route::TypeInfty => build_infty(spec, decision),
        Route::ReduceNullEps => match reduce_null_eps(spec)? {
            NullEpsReduction::Reduced(s) => build_fiber(&s, decision),
            NullEpsReduction::Uninformative(u) => Err(u.into_error()),
        },
        Route::Uninformative => Err(UninformativeRegime::for_spec(spec).into_error()),
    }
}

/// Worst-case conditional expected loss at fixed (α, β), with the dual
/// certificate attaining it.
pub fn worst_case_value(
    alpha: &[f64],
    beta: f64,
    spec: &ProblemSpec,
    opts: &SolveOptions,
) -> Result<(f64, DualCertificate)> {
    let f = build_program(
        spec,
        &Decision::Fixed {
            alpha: alpha.to_vec(),
            beta,
        },
    )?;
    let sol = solve_optimal(&f.program, opts)?;
    Ok((sol.objective, f.certificate(&sol.primal)))
}

/// Violations of 𝒜 up to this size are accepted without projection.
pub const FEASIBILITY_SLACK: f64 = 1e-7;

/// Solves the distributionally robust allocation problem for `spec`.
pub fn solve_allocation(spec: &ProblemSpec, opts: &SolveOptions) -> Result<Allocation> {
    let f = build_program(spec, &Decision::Variable)?;
    let sol = solve_optimal(&f.program, opts)?;
    let alpha = f.alpha(&sol.primal).expect("variable decision has alpha");
    let beta = f.beta(&sol.primal).expect("variable decision has beta");
    let viol = spec.feasible.violation(&alpha);
    if viol > FEASIBILITY_SLACK {
        return Err(Error::Numeric(format!(
            "solver returned alpha violating the feasible set by {viol:e}"
        )));
    }
    let conservative =
        spec.ambiguity.transport == Transport::Type1 && matches!(spec.support, crate::types::SupportSpec::WholeSpace);
    Ok(Allocation {
        alpha,
        beta,
        objective: sol.objective,
        conservative,
    })
}
