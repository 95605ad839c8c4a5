//! Mean-CVaR two-stage linear program with linear decision rules
//! υ + Υy for the recourse, on a singleton fiber.

use serde::{Deserialize, Serialize};

use super::singleton::{add_cvar_singleton, singleton_objective, singleton_preconditions};
use super::{decision_vars, CertLayout, Decision, Formulation, Layout, ProblemSpec};
use crate::conic::{solve_conic, AffineExpr, ProgramBuilder, SolveOptions, SolveStatus};
use crate::error::{Error, RegimeKind, Result};
use crate::types::LossVariant;

/// {y : Gy ≤ h}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

impl Polytope {
    /// The box lower ≤ y ≤ upper.
    pub fn boxed(lower: &[f64], upper: &[f64]) -> Result<Self> {
        let m = lower.len();
        if upper.len() != m {
            return Err(Error::Dimension("box bounds differ in length".into()));
        }
        if (0..m).any(|j| !(lower[j] <= upper[j]) || !lower[j].is_finite() || !upper[j].is_finite()) {
            return Err(Error::InvalidParameter("box bounds must be finite with lower <= upper".into()));
        }
        let mut g = Vec::with_capacity(2 * m);
        let mut h = Vec::with_capacity(2 * m);
        for j in 0..m {
            let mut row = vec![0.0; m];
            row[j] = 1.0;
            g.push(row);
            h.push(upper[j]);
        }
        for j in 0..m {
            let mut row = vec![0.0; m];
            row[j] = -1.0;
            g.push(row);
            h.push(-lower[j]);
        }
        Ok(Polytope { g, h })
    }

    pub fn dim(&self) -> usize {
        self.g.first().map_or(0, Vec::len)
    }

    /// δ*(z | P) = sup_{y ∈ P} zᵀy, by LP. `None` when unbounded.
    pub fn support_function(&self, z: &[f64], opts: &SolveOptions) -> Result<Option<f64>> {
        let mut b = ProgramBuilder::new();
        let y = b.vars("y", self.dim());
        let rows = self
            .g
            .iter()
            .zip(&self.h)
            .map(|(row, &h)| {
                row.iter()
                    .zip(&y)
                    .fold(AffineExpr::constant(h), |acc, (&c, &v)| acc.add_term(v, -c))
            })
            .collect();
        b.nonneg("polytope", rows);
        b.minimize(z.iter().zip(&y).fold(AffineExpr::zero(), |acc, (&c, &v)| acc.add_term(v, -c)));
        let sol = solve_conic(&b.build(), opts)?;
        match sol.status {
            SolveStatus::Optimal => Ok(Some(-sol.objective)),
            SolveStatus::Unbounded => Ok(None),
            SolveStatus::Infeasible => Err(Error::InvalidParameter("polytope is empty".into())),
            s => Err(Error::Numeric(format!("support function LP ended with {s:?}"))),
        }
    }

    pub fn validate(&self, opts: &SolveOptions) -> Result<()> {
        let m = self.dim();
        if m == 0 || self.g.len() != self.h.len() || self.g.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("polytope G must be K x m with K = len(h)".into()));
        }
        for j in 0..m {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; m];
                e[j] = sign;
                if self.support_function(&e, opts)?.is_none() {
                    return Err(Error::regime(
                        RegimeKind::UnboundedSupport,
                        "return support polytope is unbounded, so its support function is infinite",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Recourse h(y, α) = max {cᵀυ : Aα + Bυ ≤ Cy}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecourseSpec {
    #[serde(rename = "A")]
    pub a_mat: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_mat: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c_mat: Vec<Vec<f64>>,
    #[serde(rename = "c")]
    pub profit: Vec<f64>,
    pub support: Polytope,
}

impl RecourseSpec {
    pub fn rows(&self) -> usize {
        self.a_mat.len()
    }

    pub fn validate(&self, alpha_dim: usize, m: usize) -> Result<()> {
        let k = self.rows();
        let shape_ok = |mat: &Vec<Vec<f64>>, cols: usize| mat.len() == k && mat.iter().all(|r| r.len() == cols);
        if !shape_ok(&self.a_mat, alpha_dim) || !shape_ok(&self.b_mat, m) || !shape_ok(&self.c_mat, m) {
            return Err(Error::Dimension(format!(
                "recourse matrices must be A: {k}x{alpha_dim}, B: {k}x{m}, C: {k}x{m}"
            )));
        }
        if self.profit.len() != m || self.support.dim() != m {
            return Err(Error::Dimension("profit vector and support must have dimension m".into()));
        }
        Ok(())
    }
}

pub fn build_cvar_tslp(spec: &ProblemSpec, recourse: &RecourseSpec) -> Result<Formulation> {
    let kappa = singleton_preconditions(spec, LossVariant::MeanCvar)?;
    let m = spec.m();
    let na = spec.feasible.m();
    recourse.validate(na, m)?;
    recourse.support.validate(&SolveOptions::default())?;
    let eta = spec.loss.eta;
    let c = &recourse.profit;

    let mut b = ProgramBuilder::new();
    let ab = decision_vars(&mut b, &Decision::Variable, &spec.feasible)?;
    let ups = b.vars("upsilon", m);
    let ups_mat: Vec<Vec<_>> = (0..m).map(|i| b.vars(&format!("Upsilon[{i}]"), m)).collect();

    // (Υᵀc)_j = Σᵢ Υᵢⱼ cᵢ
    let head: Vec<AffineExpr> = (0..m)
        .map(|j| (0..m).fold(AffineExpr::zero(), |acc, i| acc.add_term(ups_mat[i][j], c[i])))
        .collect();
    let parts = add_cvar_singleton(&mut b, spec, &kappa, &head, &ab.beta);

    let poly = &recourse.support;
    let mut robust = Vec::with_capacity(recourse.rows());
    let mut duals = Vec::new();
    for k in 0..recourse.rows() {
        let pi = b.nonneg_vars(&format!("pi[{k}]"), poly.h.len());
        // Gᵀπₖ = ΥᵀBₖᵀ − Cₖᵀ
        for j in 0..m {
            let mut row = AffineExpr::constant(-recourse.c_mat[k][j]);
            for i in 0..m {
                row = row.add_term(ups_mat[i][j], recourse.b_mat[k][i]);
            }
            for (r, &p) in pi.iter().enumerate() {
                row = row.add_term(p, -poly.g[r][j]);
            }
            duals.push(row);
        }
        // eₖᵀ(Aα + Bυ) + hᵀπₖ ≤ 0
        let mut row = AffineExpr::zero();
        for (l, a) in ab.alpha.iter().enumerate() {
            row = row.add_scaled(a, -recourse.a_mat[k][l]);
        }
        for (j, &u) in ups.iter().enumerate() {
            row = row.add_term(u, -recourse.b_mat[k][j]);
        }
        for (r, &p) in pi.iter().enumerate() {
            row = row.add_term(p, -poly.h[r]);
        }
        robust.push(row);
    }
    b.eq("support_dual", duals);
    b.nonneg("robust", robust);

    let mut obj = singleton_objective(spec, &parts);
    for (j, &u) in ups.iter().enumerate() {
        obj = obj.add_term(u, -(1.0 + eta) * c[j]);
    }
    b.minimize(obj);

    Ok(Formulation {
        program: b.build(),
        layout: Layout {
            alpha: ab.alpha_idx,
            beta: ab.beta_idx,
            cert: CertLayout::Singleton {
                lambda1: parts.lambda1.0,
                lambda2: parts.lambda2.0,
                theta: parts.theta.iter().map(|v| v.0).collect(),
            },
        },
    })
}
