//! Second-order cone programs for the singleton fiber γ = 0.

use super::{decision_vars, dot_expr, CertLayout, Decision, Formulation, Layout, ProblemSpec};
use crate::conic::{AffineExpr, ProgramBuilder};
use crate::error::{Error, RegimeKind, Result};
use crate::feasibility::{rho_min, REGIME_TOL};
use crate::geometry::compute_geometry;
use crate::types::{LossVariant, SupportSpec, Transport};

/// Shared preconditions; returns κᵢ = 𝔻_𝒳(x₀, x̂ᵢ).
pub(crate) fn singleton_preconditions(spec: &ProblemSpec, variant: LossVariant) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.ambiguity.transport != Transport::Type1 || !spec.fiber.is_singleton() {
        return Err(Error::regime(
            RegimeKind::WrongBuilder,
            "singleton-fiber builders need gamma = 0 and type-1 transport",
        ));
    }
    if spec.loss.variant != variant {
        return Err(Error::regime(RegimeKind::WrongBuilder, "loss variant does not match the builder"));
    }
    if !matches!(spec.support, SupportSpec::WholeSpace) {
        return Err(Error::regime(
            RegimeKind::WrongBuilder,
            "singleton-fiber builders require whole-space return support",
        ));
    }
    let eps = spec.ambiguity.eps;
    if eps == 0.0 {
        return Err(Error::regime(
            RegimeKind::Uninformative,
            "gamma = eps = 0: the worst case is sup over the support of the loss",
        ));
    }
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    let rmin = rho_min(&geo.kappa, eps)?;
    if spec.ambiguity.rho <= rmin + REGIME_TOL {
        return Err(Error::regime(
            RegimeKind::RhoBelowMin,
            format!("rho = {} does not exceed rho_min = {rmin}", spec.ambiguity.rho),
        ));
    }
    Ok(geo.kappa)
}

/// Dispatches on the loss variant.
pub fn build_singleton(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    match spec.loss.variant {
        LossVariant::MeanVariance => build_mv_singleton(spec, decision),
        LossVariant::MeanCvar => build_cvar_singleton(spec, decision),
    }
}

pub fn build_mv_singleton(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    let kappa = singleton_preconditions(spec, LossVariant::MeanVariance)?;
    let n = spec.n_samples();
    let (rho, eps, eta) = (spec.ambiguity.rho, spec.ambiguity.eps, spec.loss.eta);

    let mut b = ProgramBuilder::new();
    let ab = decision_vars(&mut b, decision, &spec.feasible)?;
    let l1 = b.nonneg_var("lambda1");
    let l2 = b.var("lambda2");
    let theta = b.nonneg_vars("theta", n);
    let z = b.nonneg_vars("z", n);
    let w = b.var("w");

    b.nonneg("w_bounds", vec![w.into(), AffineExpr::constant(1.0).add_term(w, -1.0)]);
    let mut tail: Vec<AffineExpr> = ab.alpha.iter().map(|a| a.clone() * 2.0).collect();
    tail.push(AffineExpr::constant(1.0).add_term(w, -1.0).add_term(l1, -eps));
    b.soc("alpha_norm", AffineExpr::constant(1.0).add_term(w, -1.0).add_term(l1, eps), tail);

    let mut links = Vec::with_capacity(n);
    for i in 0..n {
        // zᵢ = εθᵢ + εκᵢλ₁ + ελ₂ + η²/4 + ηβ
        let rhs = AffineExpr::term(theta[i], eps)
            .add_term(l1, eps * kappa[i])
            .add_term(l2, eps)
            .add_const(eta * eta / 4.0)
            .add_scaled(&ab.beta, eta);
        links.push(AffineExpr::var(z[i]) - rhs);
        let resid = dot_expr(spec.data.y(i), &ab.alpha) * 2.0 - ab.beta.clone() * 2.0 + AffineExpr::constant(-eta);
        b.soc(
            format!("sample[{i}]"),
            AffineExpr::var(z[i]).add_term(w, 1.0),
            vec![resid, AffineExpr::var(z[i]).add_term(w, -1.0)],
        );
    }
    b.eq("z_link", links);

    let mut obj = AffineExpr::term(l1, rho).add_term(l2, eps);
    for &t in &theta {
        obj = obj.add_term(t, 1.0 / n as f64);
    }
    b.minimize(obj);

    Ok(Formulation {
        program: b.build(),
        layout: Layout {
            alpha: ab.alpha_idx,
            beta: ab.beta_idx,
            cert: CertLayout::Singleton {
                lambda1: l1.0,
                lambda2: l2.0,
                theta: theta.iter().map(|v| v.0).collect(),
            },
        },
    })
}

/// Core of the mean-CVaR SOCP, parameterized by the vector that plays the
/// role of α in the cone heads (α itself, or Υᵀc for the recourse model).
pub(crate) struct CvarSingletonParts {
    pub lambda1: crate::conic::Var,
    pub lambda2: crate::conic::Var,
    pub theta: Vec<crate::conic::Var>,
}

pub(crate) fn add_cvar_singleton(
    b: &mut ProgramBuilder,
    spec: &ProblemSpec,
    kappa: &[f64],
    head: &[AffineExpr],
    beta: &AffineExpr,
) -> CvarSingletonParts {
    let n = spec.n_samples();
    let (eps, eta, tau) = (spec.ambiguity.eps, spec.loss.eta, spec.loss.tau);
    let l1 = b.nonneg_var("lambda1");
    let l2 = b.var("lambda2");
    let theta = b.nonneg_vars("theta", n);
    let z = b.nonneg_vars("z", n);
    let zt = b.nonneg_vars("z_tilde", n);

    let k1 = eta / eps;
    let k2 = (eta + 1.0 / tau) / eps;
    let b1 = -1.0 / eps;
    let b2 = -(1.0 - 1.0 / tau) / eps;
    let mut links = Vec::with_capacity(2 * n);
    for i in 0..n {
        let base = AffineExpr::var(theta[i]).add_term(l1, kappa[i]).add_term(l2, 1.0);
        let ret = dot_expr(spec.data.y(i), head);
        links.push(AffineExpr::var(z[i]) - base.clone().add_scaled(&ret, k1).add_scaled(beta, b1));
        links.push(AffineExpr::var(zt[i]) - base.add_scaled(&ret, k2).add_scaled(beta, b2));
    }
    b.eq("z_link", links);
    for i in 0..n {
        for (name, zi, k) in [("cone_a", z[i], k1), ("cone_b", zt[i], k2)] {
            let mut tail: Vec<AffineExpr> = head.iter().map(|h| h.clone() * k).collect();
            tail.push(AffineExpr::var(zi).add_term(l1, -1.0));
            b.soc(format!("{name}[{i}]"), AffineExpr::var(zi).add_term(l1, 1.0), tail);
        }
    }
    CvarSingletonParts {
        lambda1: l1,
        lambda2: l2,
        theta,
    }
}

pub(crate) fn singleton_objective(spec: &ProblemSpec, parts: &CvarSingletonParts) -> AffineExpr {
    let n = spec.n_samples() as f64;
    let mut obj = AffineExpr::term(parts.lambda1, spec.ambiguity.rho).add_term(parts.lambda2, spec.ambiguity.eps);
    for &t in &parts.theta {
        obj = obj.add_term(t, 1.0 / n);
    }
    obj
}

pub fn build_cvar_singleton(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    let kappa = singleton_preconditions(spec, LossVariant::MeanCvar)?;
    let mut b = ProgramBuilder::new();
    let ab = decision_vars(&mut b, decision, &spec.feasible)?;
    let parts = add_cvar_singleton(&mut b, spec, &kappa, &ab.alpha, &ab.beta);
    b.minimize(singleton_objective(spec, &parts));
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
