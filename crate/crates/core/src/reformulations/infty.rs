//! Type-∞ transport: each sample may move by at most ρ, so the worst case
//! for sample i is a sup over the ball ‖y − ŷᵢ‖² ≤ ρ − κᵢ.

use super::{decision_vars, dot_expr, CertLayout, Decision, Formulation, Layout, ProblemSpec};
use crate::conic::{AffineExpr, ProgramBuilder};
use crate::error::{Error, RegimeKind, Result};
use crate::feasibility::REGIME_TOL;
use crate::geometry::{compute_geometry, type_infty_index};
use crate::loss::{cvar_pieces, dot};
use crate::types::{LossSpec, LossVariant, SupportSpec, Transport};

/// vᵢ* = sup {ℓ(y, α, β) : ‖y − ŷ‖₂² ≤ r}.
pub fn infty_vstar(alpha: &[f64], beta: f64, y_hat: &[f64], r: f64, loss: &LossSpec) -> f64 {
    let na = dot(alpha, alpha).sqrt();
    let reach = na * r.max(0.0).sqrt();
    let z = dot(y_hat, alpha);
    match loss.variant {
        LossVariant::MeanVariance => {
            let eta = loss.eta;
            ((z - beta - eta / 2.0).abs() + reach).powi(2) - eta * beta - eta * eta / 4.0
        }
        LossVariant::MeanCvar => cvar_pieces(loss.eta, loss.tau)
            .iter()
            .map(|&(a, bc)| a * z + bc * beta + a.abs() * reach)
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

pub fn build_infty(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    match spec.loss.variant {
        LossVariant::MeanVariance => build_mv_infty(spec, decision),
        LossVariant::MeanCvar => build_infty_inner(spec, decision),
    }
}

pub fn build_mv_infty(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    if spec.loss.variant != LossVariant::MeanVariance {
        return Err(Error::regime(RegimeKind::WrongBuilder, "loss variant does not match the builder"));
    }
    build_infty_inner(spec, decision)
}

fn build_infty_inner(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    spec.validate()?;
    if spec.ambiguity.transport != Transport::TypeInfinity {
        return Err(Error::regime(RegimeKind::WrongBuilder, "type-infinity builder needs type-infinity transport"));
    }
    if !matches!(spec.support, SupportSpec::WholeSpace) {
        return Err(Error::regime(
            RegimeKind::WrongBuilder,
            "the type-infinity reformulation requires whole-space return support",
        ));
    }
    let rho = spec.ambiguity.rho;
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    let kmin = geo.kappa.iter().copied().fold(f64::INFINITY, f64::min);
    if rho <= kmin + REGIME_TOL {
        return Err(Error::regime(
            RegimeKind::RhoBelowMin,
            format!("rho = {rho} does not exceed min kappa = {kmin}"),
        ));
    }
    let idx = type_infty_index(&spec.data, &spec.fiber, rho, &spec.cost)?;
    let eta = spec.loss.eta;

    let mut b = ProgramBuilder::new();
    let ab = decision_vars(&mut b, decision, &spec.feasible)?;
    let lambda = b.var("lambda");

    // ‖α‖₂, shared by every sample.
    let norm_alpha: AffineExpr = match decision {
        Decision::Variable => {
            let na = b.nonneg_var("norm_alpha");
            b.soc("alpha_norm", na.into(), ab.alpha.clone());
            na.into()
        }
        Decision::Fixed { alpha, .. } => AffineExpr::constant(dot(alpha, alpha).sqrt()),
    };

    let mut u = Vec::with_capacity(idx.j.len());
    let mut sum_u = AffineExpr::zero();
    let mut lin = Vec::new();
    for &i in &idx.j {
        let ui = if idx.is_j1(i) {
            b.var(format!("u[{i}]"))
        } else {
            b.nonneg_var(format!("u[{i}]"))
        };
        u.push((i, ui.0));
        sum_u = sum_u.add_term(ui, -1.0);
        let sr = (rho - geo.kappa[i]).max(0.0).sqrt();
        let ret = dot_expr(spec.data.y(i), &ab.alpha);
        match spec.loss.variant {
            LossVariant::MeanVariance => {
                let t = b.var(format!("t[{i}]"));
                let z = b.nonneg_var(format!("z[{i}]"));
                // u-independent shift ηβ + η²/4 inside the rotated cone.
                let shift = AffineExpr::var(lambda)
                    .add_term(ui, 1.0)
                    .add_scaled(&ab.beta, eta)
                    .add_const(eta * eta / 4.0);
                b.soc(
                    format!("sample[{i}]"),
                    shift.clone().add_const(1.0),
                    vec![AffineExpr::term(z, 2.0), AffineExpr::constant(1.0) - shift],
                );
                let resid = ret - ab.beta.clone() + AffineExpr::constant(-eta / 2.0);
                lin.push(AffineExpr::var(t) - resid.clone());
                lin.push(AffineExpr::var(t) + resid);
                lin.push(AffineExpr::var(z).add_term(t, -1.0).add_scaled(&norm_alpha, -sr));
            }
            LossVariant::MeanCvar => {
                for (a, bc) in cvar_pieces(eta, spec.loss.tau) {
                    lin.push(
                        AffineExpr::var(lambda)
                            .add_term(ui, 1.0)
                            .add_scaled(&ret, -a)
                            .add_scaled(&ab.beta, -bc)
                            .add_scaled(&norm_alpha, -a.abs() * sr),
                    );
                }
            }
        }
    }
    b.nonneg("budget", vec![sum_u]);
    b.nonneg("epigraph", lin);
    b.minimize(lambda.into());

    let n = spec.n_samples();
    let mut j1 = vec![false; n];
    for &i in &idx.j1 {
        j1[i] = true;
    }
    Ok(Formulation {
        program: b.build(),
        layout: Layout {
            alpha: ab.alpha_idx,
            beta: ab.beta_idx,
            cert: CertLayout::TypeInfty {
                lambda: lambda.0,
                u,
                j1,
            },
        },
    })
}
