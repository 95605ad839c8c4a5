//! Semidefinite programs for a fiber of positive radius γ > 0.
//!
//! With (α, β) free the mean-variance block is bilinear as printed
//! (β·α appears in an off-diagonal). A Schur complement on [α; −β] gives
//! the equivalent affine LMI of order m + 2
//!
//! ```text
//! [ λI + ωQ            (η/2)α − λŷ + ωq     α ]
//! [ ·                  s + λ‖ŷ‖² + ωq₀      −β ] ⪰ 0
//! [ αᵀ                 −β                   1 ]
//! ```
//!
//! which is used for joint solves. With (α, β) fixed the printed form
//! (A, t and three LMIs) is affine and is emitted as is.

use super::{decision_vars, CertLayout, Decision, Formulation, Layout, ProblemSpec};
use crate::conic::{AffineExpr, ProgramBuilder, Var};
use crate::error::{Error, RegimeKind, Result};
use crate::feasibility::{rho_min, REGIME_TOL};
use crate::geometry::{compute_geometry, GeometryStats};
use crate::types::{LossVariant, SupportSpec, Transport};

fn fiber_preconditions(spec: &ProblemSpec, variant: LossVariant) -> Result<GeometryStats> {
    spec.validate()?;
    if spec.ambiguity.transport != Transport::Type1 || spec.fiber.is_singleton() {
        return Err(Error::regime(
            RegimeKind::WrongBuilder,
            "fiber builders need gamma > 0 and type-1 transport",
        ));
    }
    if spec.loss.variant != variant {
        return Err(Error::regime(RegimeKind::WrongBuilder, "loss variant does not match the builder"));
    }
    if spec.ambiguity.eps == 0.0 {
        return Err(Error::regime(
            RegimeKind::NullProbability,
            "eps = 0: reduce to the implied floor with reduce_null_eps first",
        ));
    }
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    let rmin = rho_min(&geo.kappa, spec.ambiguity.eps)?;
    if spec.ambiguity.rho <= rmin + REGIME_TOL {
        return Err(Error::regime(
            RegimeKind::RhoBelowMin,
            format!("rho = {} does not exceed rho_min = {rmin}", spec.ambiguity.rho),
        ));
    }
    Ok(geo)
}

struct VSet {
    lambda: Vec<Var>,
    s: Vec<Var>,
    nu_plus: Var,
    nu_minus: Var,
    phi: Var,
    varphi: Var,
    psi: Vec<Var>,
}

fn add_v_set(b: &mut ProgramBuilder, spec: &ProblemSpec, geo: &GeometryStats) -> VSet {
    let n = spec.n_samples();
    let v = VSet {
        lambda: b.nonneg_vars("lambda", n),
        s: b.vars("s", n),
        nu_plus: b.nonneg_var("nu_plus"),
        nu_minus: b.nonneg_var("nu_minus"),
        phi: b.var("phi"),
        varphi: b.nonneg_var("varphi"),
        psi: b.nonneg_vars("psi", n),
    };
    let mut rows = Vec::with_capacity(2 * n + 1);
    for i in 0..n {
        let sign = if geo.in_fiber(i) { -1.0 } else { 1.0 };
        rows.push(
            AffineExpr::var(v.phi)
                .add_term(v.varphi, sign * geo.d[i])
                .add_term(v.psi[i], 1.0)
                .add_term(v.s[i], -1.0),
        );
    }
    let sum_d: f64 = geo.i1.iter().map(|&i| geo.d[i]).sum();
    let mut agg = AffineExpr::var(v.nu_plus)
        .add_term(v.nu_minus, -1.0)
        .add_term(v.varphi, sum_d - n as f64 * spec.ambiguity.rho);
    for &p in &v.psi {
        agg = agg.add_term(p, -1.0);
    }
    rows.push(agg);
    for &l in &v.lambda {
        rows.push(AffineExpr::var(v.varphi).add_term(l, -1.0));
    }
    b.nonneg("dual_set", rows);
    let nn = n as f64;
    let eps = spec.ambiguity.eps;
    b.minimize(
        AffineExpr::var(v.phi)
            .add_term(v.nu_plus, 1.0 / (nn * eps))
            .add_term(v.nu_minus, -1.0 / nn),
    );
    v
}

fn layout(v: &VSet, omega: Vec<Vec<Var>>, geo: &GeometryStats, spec: &ProblemSpec) -> CertLayout {
    let ix = |vs: &[Var]| vs.iter().map(|v| v.0).collect::<Vec<_>>();
    CertLayout::Fiber {
        lambda: ix(&v.lambda),
        s: ix(&v.s),
        nu_plus: v.nu_plus.0,
        nu_minus: v.nu_minus.0,
        phi: v.phi.0,
        varphi: v.varphi.0,
        psi: ix(&v.psi),
        omega: omega.iter().map(|o| ix(o)).collect(),
        d: geo.d.clone(),
        in_fiber: (0..spec.n_samples()).map(|i| geo.in_fiber(i)).collect(),
        rho: spec.ambiguity.rho,
    }
}

/// Ellipsoid data (Q, q, q₀), when the support is one.
fn ellipsoid(spec: &ProblemSpec) -> Option<(&Vec<Vec<f64>>, &Vec<f64>, f64)> {
    match &spec.support {
        SupportSpec::WholeSpace => None,
        SupportSpec::Ellipsoid(e) => Some((&e.q_matrix, &e.q, e.q0)),
    }
}

/// The (m+1)-order block
/// [[λI + ωQ, off + ωq], [·, corner + ωq₀]] as a full matrix.
fn quad_block(
    lambda: Var,
    off: &[AffineExpr],
    corner: AffineExpr,
    omega: Option<(Var, &Vec<Vec<f64>>, &Vec<f64>, f64)>,
) -> Vec<Vec<AffineExpr>> {
    let m = off.len();
    let mut mat = vec![vec![AffineExpr::zero(); m + 1]; m + 1];
    for j in 0..m {
        mat[j][j] = AffineExpr::var(lambda);
        mat[j][m] = off[j].clone();
        mat[m][j] = off[j].clone();
    }
    mat[m][m] = corner;
    if let Some((w, q_mat, q, q0)) = omega {
        for j in 0..m {
            for k in 0..m {
                mat[j][k] = mat[j][k].clone().add_term(w, q_mat[j][k]);
            }
            mat[j][m] = mat[j][m].clone().add_term(w, q[j]);
            mat[m][j] = mat[m][j].clone().add_term(w, q[j]);
        }
        mat[m][m] = mat[m][m].clone().add_term(w, q0);
    }
    mat
}

pub fn build_fiber(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    match spec.loss.variant {
        LossVariant::MeanVariance => build_mv_fiber(spec, decision),
        LossVariant::MeanCvar => build_cvar_fiber(spec, decision),
    }
}

pub fn build_mv_fiber(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    let geo = fiber_preconditions(spec, LossVariant::MeanVariance)?;
    let n = spec.n_samples();
    let m = spec.m();
    let eta = spec.loss.eta;
    let ell = ellipsoid(spec);

    let mut b = ProgramBuilder::new();
    let ab = decision_vars(&mut b, decision, &spec.feasible)?;
    let v = add_v_set(&mut b, spec, &geo);
    let omega = if ell.is_some() { b.nonneg_vars("omega", n) } else { Vec::new() };
    let om = |i: usize| ell.map(|(q_mat, q, q0)| (omega[i], q_mat, q, q0));

    match decision {
        Decision::Variable => {
            for i in 0..n {
                let y = spec.data.y(i);
                let ynorm2: f64 = y.iter().map(|a| a * a).sum();
                let off: Vec<AffineExpr> = (0..m)
                    .map(|j| (ab.alpha[j].clone() * (eta / 2.0)).add_term(v.lambda[i], -y[j]))
                    .collect();
                let corner = AffineExpr::var(v.s[i]).add_term(v.lambda[i], ynorm2);
                let mut mat = quad_block(v.lambda[i], &off, corner, om(i));
                for (j, row) in mat.iter_mut().enumerate().take(m) {
                    row.push(ab.alpha[j].clone());
                }
                mat[m].push(-ab.beta.clone());
                let mut last: Vec<AffineExpr> = ab.alpha.clone();
                last.push(-ab.beta.clone());
                last.push(AffineExpr::constant(1.0));
                mat.push(last);
                b.psd(format!("sample[{i}]"), mat);
            }
        }
        Decision::Fixed { alpha, beta } => {
            let t = b.var("t");
            b.psd(
                "t_beta",
                vec![
                    vec![t.into(), AffineExpr::constant(*beta)],
                    vec![AffineExpr::constant(*beta), AffineExpr::constant(1.0)],
                ],
            );
            for i in 0..n {
                // Symmetric matrix variable Aᵢ.
                let mut a_mat = vec![vec![AffineExpr::zero(); m]; m];
                for j in 0..m {
                    for k in j..m {
                        let var = b.var(format!("A[{i}][{j},{k}]"));
                        a_mat[j][k] = var.into();
                        a_mat[k][j] = var.into();
                    }
                }
                b.psd(format!("A[{i}]"), a_mat.clone());

                let mut first = vec![vec![AffineExpr::zero(); m + 1]; m + 1];
                for j in 0..m {
                    for k in 0..m {
                        let diag = if j == k { AffineExpr::var(v.lambda[i]) } else { AffineExpr::zero() };
                        first[j][k] = diag - a_mat[j][k].clone();
                    }
                    first[j][m] = AffineExpr::constant(alpha[j]);
                    first[m][j] = AffineExpr::constant(alpha[j]);
                }
                first[m][m] = AffineExpr::constant(1.0);
                b.psd(format!("alpha_block[{i}]"), first);

                let y = spec.data.y(i);
                let ynorm2: f64 = y.iter().map(|a| a * a).sum();
                let mut second = vec![vec![AffineExpr::zero(); m + 1]; m + 1];
                for j in 0..m {
                    for k in 0..m {
                        second[j][k] = a_mat[j][k].clone();
                    }
                    let off = AffineExpr::constant((beta + eta / 2.0) * alpha[j]).add_term(v.lambda[i], -y[j]);
                    second[j][m] = off.clone();
                    second[m][j] = off;
                }
                second[m][m] = AffineExpr::var(v.s[i]).add_term(v.lambda[i], ynorm2).add_term(t, -1.0);
                if let Some((w, q_mat, q, q0)) = om(i) {
                    for j in 0..m {
                        for k in 0..m {
                            second[j][k] = second[j][k].clone().add_term(w, q_mat[j][k]);
                        }
                        second[j][m] = second[j][m].clone().add_term(w, q[j]);
                        second[m][j] = second[m][j].clone().add_term(w, q[j]);
                    }
                    second[m][m] = second[m][m].clone().add_term(w, q0);
                }
                b.psd(format!("sample[{i}]"), second);
            }
        }
    }

    let omega_layout = if omega.is_empty() { Vec::new() } else { vec![omega] };
    let cert = layout(&v, omega_layout, &geo, spec);
    Ok(Formulation {
        program: b.build(),
        layout: Layout {
            alpha: ab.alpha_idx,
            beta: ab.beta_idx,
            cert,
        },
    })
}

pub fn build_cvar_fiber(spec: &ProblemSpec, decision: &Decision) -> Result<Formulation> {
    let geo = fiber_preconditions(spec, LossVariant::MeanCvar)?;
    let n = spec.n_samples();
    let m = spec.m();
    let (eta, tau) = (spec.loss.eta, spec.loss.tau);
    let ell = ellipsoid(spec);

    let mut b = ProgramBuilder::new();
    let ab = decision_vars(&mut b, decision, &spec.feasible)?;
    let v = add_v_set(&mut b, spec, &geo);
    let omega: Vec<Vec<Var>> = if ell.is_some() {
        vec![b.nonneg_vars("omega_a", n), b.nonneg_vars("omega_b", n)]
    } else {
        Vec::new()
    };

    // ℓ = max_k (−a_k z + b_k β) with a = (η, η + 1/τ), b = (1, 1 − 1/τ).
    let pieces = [(eta / 2.0, 1.0), ((eta * tau + 1.0) / (2.0 * tau), 1.0 - 1.0 / tau)];
    for i in 0..n {
        let y = spec.data.y(i);
        let ynorm2: f64 = y.iter().map(|a| a * a).sum();
        for (k, &(half_slope, bcoef)) in pieces.iter().enumerate() {
            let off: Vec<AffineExpr> = (0..m)
                .map(|j| (ab.alpha[j].clone() * half_slope).add_term(v.lambda[i], -y[j]))
                .collect();
            let corner = AffineExpr::var(v.s[i])
                .add_term(v.lambda[i], ynorm2)
                .add_scaled(&ab.beta, -bcoef);
            let w = ell.map(|(q_mat, q, q0)| (omega[k][i], q_mat, q, q0));
            let name = if k == 0 { "piece_a" } else { "piece_b" };
            b.psd(format!("{name}[{i}]"), quad_block(v.lambda[i], &off, corner, w));
        }
    }

    let cert = layout(&v, omega, &geo, spec);
    Ok(Formulation {
        program: b.build(),
        layout: Layout {
            alpha: ab.alpha_idx,
            beta: ab.beta_idx,
            cert,
        },
    })
}
