//! The feasibility knapsacks written as explicit LPs and solved by vertex
//! enumeration; slow, but independent of the greedy code paths.

use crate::conic::{solve_optimal, AffineExpr, Backend, ProgramBuilder, SolveOptions};
use crate::error::{Error, Result};

fn vertex_opts() -> SolveOptions {
    SolveOptions {
        backend: Some(Backend::Vertex),
        ..SolveOptions::default()
    }
}

/// min (1/N) Σ κᵢυᵢ  s.t.  (1/N) Σ υᵢ ≥ ε,  0 ≤ υ ≤ 1.
pub fn rho_min_lp(kappa: &[f64], eps: f64) -> Result<f64> {
    let n = kappa.len();
    if n == 0 {
        return Err(Error::Dimension("empty sample set".into()));
    }
    let nf = n as f64;
    let mut b = ProgramBuilder::new();
    let u = b.vars("upsilon", n);
    let mut rows: Vec<AffineExpr> = Vec::new();
    let mut mass = AffineExpr::constant(-eps);
    let mut obj = AffineExpr::zero();
    for (i, &v) in u.iter().enumerate() {
        rows.push(v.into());
        rows.push(AffineExpr::constant(1.0).add_term(v, -1.0));
        mass = mass.add_term(v, 1.0 / nf);
        obj = obj.add_term(v, kappa[i] / nf);
    }
    rows.push(mass);
    b.nonneg("rows", rows);
    b.minimize(obj);
    Ok(solve_optimal(&b.build(), &vertex_opts())?.objective)
}

/// min (1/N) Σ_{𝓘₁} pᵢ  s.t.  (1/N) Σ_{𝓘₁} (1 − pᵢ) dᵢ ≤ ρ,  0 ≤ p ≤ 1.
pub fn eps_lower_lp(d: &[f64], i1: &[usize], rho: f64) -> Result<f64> {
    let nf = d.len() as f64;
    if i1.is_empty() {
        return Ok(0.0);
    }
    let mut b = ProgramBuilder::new();
    let p = b.vars("p", i1.len());
    let mut rows: Vec<AffineExpr> = Vec::new();
    let mut budget = AffineExpr::constant(rho);
    let mut obj = AffineExpr::zero();
    for (k, &i) in i1.iter().enumerate() {
        rows.push(p[k].into());
        rows.push(AffineExpr::constant(1.0).add_term(p[k], -1.0));
        budget = budget.add_const(-d[i] / nf).add_term(p[k], d[i] / nf);
        obj = obj.add_term(p[k], 1.0 / nf);
    }
    rows.push(budget);
    b.nonneg("rows", rows);
    b.minimize(obj);
    Ok(solve_optimal(&b.build(), &vertex_opts())?.objective)
}
