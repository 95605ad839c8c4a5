//! The model zoo: one allocation rule per model, each a conic program.

use serde::{Deserialize, Serialize};

use crate::conic::{solve_optimal, AffineExpr, ProgramBuilder, SolveOptions};
use crate::error::{Error, Result};
use crate::feasibility::rho_min;
use crate::geometry::{compute_geometry, GroundCostConfig, XCost};
use crate::loss::cvar_pieces;
use crate::reformulations::{add_feasible, dot_expr, solve_allocation, ProblemSpec, FEASIBILITY_SLACK};
use crate::types::{AmbiguitySpec, Allocation, FeasibleSet, FiberSpec, LossSpec, LossVariant, Sample, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelId {
    Ew,
    Mv,
    Drmv,
    Cmv,
    Drcmv,
    Otcmv,
    Mc,
    Drmc,
    Cmc,
    Drcmc,
    Otcmc,
}

impl ModelId {
    pub const MV_FAMILY: [ModelId; 6] = [
        ModelId::Ew,
        ModelId::Mv,
        ModelId::Drmv,
        ModelId::Cmv,
        ModelId::Drcmv,
        ModelId::Otcmv,
    ];
    pub const CVAR_FAMILY: [ModelId; 5] = [ModelId::Mc, ModelId::Drmc, ModelId::Cmc, ModelId::Drcmc, ModelId::Otcmc];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Ew => "EW",
            ModelId::Mv => "MV",
            ModelId::Drmv => "DRMV",
            ModelId::Cmv => "CMV",
            ModelId::Drcmv => "DRCMV",
            ModelId::Otcmv => "OTCMV",
            ModelId::Mc => "MC",
            ModelId::Drmc => "DRMC",
            ModelId::Cmc => "CMC",
            ModelId::Drcmc => "DRCMC",
            ModelId::Otcmc => "OTCMC",
        }
    }

    /// Loss family; EW has none.
    pub fn variant(self) -> Option<LossVariant> {
        match self {
            ModelId::Ew => None,
            ModelId::Mv | ModelId::Drmv | ModelId::Cmv | ModelId::Drcmv | ModelId::Otcmv => {
                Some(LossVariant::MeanVariance)
            }
            _ => Some(LossVariant::MeanCvar),
        }
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelId::MV_FAMILY
            .iter()
            .chain(&ModelId::CVAR_FAMILY)
            .copied()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model {s:?}")))
    }
}

/// Hyperparameters; each model reads only the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelParams {
    pub eta: f64,
    pub tau: f64,
    /// Transport budget (DRMV, DRMC).
    pub rho: Option<f64>,
    /// Quantile level a of the covariate distances defining γ (CMV, DRCMV).
    pub gamma_quantile: Option<f64>,
    /// Quantile level b of the covariate distances defining ρ (DRCMV).
    pub rho_quantile: Option<f64>,
    /// Probability floor ε (OTCMV).
    pub eps: Option<f64>,
    /// ρ = scale · ρ_min (OTCMV).
    pub rho_scale: Option<f64>,
}

impl ModelParams {
    /// Grid coordinates in a fixed field order, for lexicographic ties.
    pub fn key(&self) -> Vec<f64> {
        [
            Some(self.eta),
            self.rho,
            self.gamma_quantile,
            self.rho_quantile,
            self.eps,
            self.rho_scale,
        ]
        .iter()
        .map(|v| v.unwrap_or(f64::NEG_INFINITY))
        .collect()
    }
}

fn need(v: Option<f64>, model: ModelId, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParameter(format!("{model} needs hyperparameter {what}")))
}

/// Lower empirical quantile of the covariate distances Δᵢ = 𝔻_𝒳(x̂ᵢ, x₀):
/// the ⌈aN⌉-th smallest, so at least one sample lies within it.
pub fn distance_quantile(window: &SampleSet, x0: &[f64], a: f64) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level must lie in (0, 1], got {a}")));
    }
    let mut d: Vec<f64> = window.iter().map(|s| XCost::SquaredEuclidean.cost(&s.x, x0)).collect();
    d.sort_by(f64::total_cmp);
    let k = ((a * d.len() as f64).ceil() as usize).clamp(1, d.len());
    Ok(d[k - 1])
}

fn loss_for(model: ModelId, p: &ModelParams) -> Result<LossSpec> {
    match model.variant() {
        Some(LossVariant::MeanVariance) => LossSpec::mean_variance(p.eta),
        Some(LossVariant::MeanCvar) => LossSpec::mean_cvar(p.eta, p.tau),
        None => Err(Error::InvalidParameter("EW has no loss".into())),
    }
}

fn alpha_vars(b: &mut ProgramBuilder, feasible: &FeasibleSet) -> (Vec<usize>, Vec<AffineExpr>) {
    let a = b.vars("alpha", feasible.m());
    let exprs: Vec<AffineExpr> = a.iter().map(|&v| v.into()).collect();
    add_feasible(b, &exprs, feasible);
    (a.iter().map(|v| v.0).collect(), exprs)
}

fn finish(
    b: ProgramBuilder,
    alpha_idx: &[usize],
    beta: impl Fn(&[f64]) -> f64,
    feasible: &FeasibleSet,
    opts: &SolveOptions,
) -> Result<Allocation> {
    let sol = solve_optimal(&b.build(), opts)?;
    let alpha: Vec<f64> = alpha_idx.iter().map(|&i| sol.primal[i]).collect();
    let viol = feasible.violation(&alpha);
    if viol > FEASIBILITY_SLACK {
        return Err(Error::Numeric(format!("allocation violates the feasible set by {viol:e}")));
    }
    Ok(Allocation {
        beta: beta(&sol.primal),
        alpha,
        objective: sol.objective,
        conservative: false,
    })
}

/// min ‖α‖₂ over 𝒜.
pub fn equal_weight(feasible: &FeasibleSet, opts: &SolveOptions) -> Result<Allocation> {
    let mut b = ProgramBuilder::new();
    let (idx, alpha) = alpha_vars(&mut b, feasible);
    let t = b.nonneg_var("norm");
    b.soc("alpha_norm", t.into(), alpha);
    b.minimize(t.into());
    finish(b, &idx, |_| 0.0, feasible, opts)
}

/// min_{α, β} (1/N) Σ ℓ(ŷᵢ, α, β) on the given returns.
pub fn saa_allocation(
    returns: &[&[f64]],
    loss: &LossSpec,
    feasible: &FeasibleSet,
    opts: &SolveOptions,
) -> Result<Allocation> {
    if returns.is_empty() {
        return Err(Error::EmptyFiber);
    }
    let nf = returns.len() as f64;
    let mut b = ProgramBuilder::new();
    let (idx, alpha) = alpha_vars(&mut b, feasible);
    let beta = b.var("beta");
    let mut obj = AffineExpr::zero();
    match loss.variant {
        LossVariant::MeanVariance => {
            // t ≥ (1/N) Σ (ŷᵢᵀα − β)² as a rotated cone.
            let t = b.nonneg_var("t");
            let mut tail = vec![AffineExpr::var(t).add_const(-1.0)];
            for y in returns {
                tail.push((dot_expr(y, &alpha).add_term(beta, -1.0)) * (2.0 / nf.sqrt()));
                obj = obj.add_scaled(&dot_expr(y, &alpha), -loss.eta / nf);
            }
            b.soc("variance", AffineExpr::var(t).add_const(1.0), tail);
            obj = obj.add_term(t, 1.0);
        }
        LossVariant::MeanCvar => {
            let s = b.vars("s", returns.len());
            let mut rows = Vec::new();
            for (y, &si) in returns.iter().zip(&s) {
                for (a, bc) in cvar_pieces(loss.eta, loss.tau) {
                    rows.push(AffineExpr::var(si).add_scaled(&dot_expr(y, &alpha), -a).add_term(beta, -bc));
                }
                obj = obj.add_term(si, 1.0 / nf);
            }
            b.nonneg("epigraph", rows);
        }
    }
    b.minimize(obj);
    let bi = beta.0;
    finish(b, &idx, move |x| x[bi], feasible, opts)
}

/// min √(αᵀΣα) − ημᵀα + √((1+η²)ρ)‖α‖₂ with empirical (1/N) moments.
pub fn drmv_allocation(window: &SampleSet, eta: f64, rho: f64, feasible: &FeasibleSet, opts: &SolveOptions) -> Result<Allocation> {
    let m = window.m();
    let nf = window.len() as f64;
    let mean: Vec<f64> = (0..m).map(|j| window.iter().map(|s| s.y[j]).sum::<f64>() / nf).collect();
    let mut b = ProgramBuilder::new();
    let (idx, alpha) = alpha_vars(&mut b, feasible);
    let s = b.nonneg_var("std");
    let nrm = b.nonneg_var("norm");
    let centred: Vec<AffineExpr> = window
        .iter()
        .map(|smp| {
            let c: Vec<f64> = smp.y.iter().zip(&mean).map(|(y, mu)| (y - mu) / nf.sqrt()).collect();
            dot_expr(&c, &alpha)
        })
        .collect();
    b.soc("std", s.into(), centred);
    b.soc("alpha_norm", nrm.into(), alpha.clone());
    let obj = AffineExpr::var(s)
        .add_scaled(&dot_expr(&mean, &alpha), -eta)
        .add_term(nrm, ((1.0 + eta * eta) * rho).sqrt());
    b.minimize(obj);
    finish(b, &idx, |x| idx.iter().zip(&mean).map(|(&i, mu)| x[i] * mu).sum(), feasible, opts)
}

/// Allocation of `model` from the training `window` at covariate `x0`.
pub fn allocate(
    model: ModelId,
    window: &SampleSet,
    x0: &[f64],
    params: &ModelParams,
    feasible: &FeasibleSet,
    opts: &SolveOptions,
) -> Result<Allocation> {
    if window.is_empty() {
        return Err(Error::InvalidParameter("empty training window".into()));
    }
    if x0.len() != window.n() {
        return Err(Error::Dimension("x0 and covariates differ in dimension".into()));
    }
    let all: Vec<&[f64]> = window.iter().map(|s| s.y.as_slice()).collect();
    match model {
        ModelId::Ew => equal_weight(feasible, opts),
        ModelId::Mv | ModelId::Mc => saa_allocation(&all, &loss_for(model, params)?, feasible, opts),
        ModelId::Drmv => drmv_allocation(window, params.eta, need(params.rho, model, "rho")?, feasible, opts),
        ModelId::Cmv | ModelId::Cmc => {
            let gamma = distance_quantile(window, x0, need(params.gamma_quantile, model, "gamma_quantile")?)?;
            let inside: Vec<&[f64]> = window
                .iter()
                .filter(|s| XCost::SquaredEuclidean.cost(&s.x, x0) <= gamma)
                .map(|s| s.y.as_slice())
                .collect();
            saa_allocation(&inside, &loss_for(model, params)?, feasible, opts)
        }
        ModelId::Drmc => {
            // Unconditional type-1 DRO: every covariate sits on the fiber and
            // ε = 1 forbids moving mass off it.
            let pinned = SampleSet::new(window.iter().map(|s| Sample { x: vec![0.0], y: s.y.clone() }).collect())?;
            let spec = ProblemSpec::new(
                pinned,
                FiberSpec::new(vec![0.0], 0.0)?,
                AmbiguitySpec::new(need(params.rho, model, "rho")?, 1.0)?,
                loss_for(model, params)?,
            )?
            .with_feasible(feasible.clone())?;
            solve_allocation(&spec, opts)
        }
        ModelId::Drcmv | ModelId::Drcmc => {
            let gamma = distance_quantile(window, x0, need(params.gamma_quantile, model, "gamma_quantile")?)?;
            let rho = distance_quantile(window, x0, need(params.rho_quantile, model, "rho_quantile")?)?;
            let spec = ProblemSpec::new(
                window.clone(),
                FiberSpec::new(x0.to_vec(), gamma)?,
                AmbiguitySpec::type_infinity(rho)?,
                loss_for(model, params)?,
            )?
            .with_feasible(feasible.clone())?;
            solve_allocation(&spec, opts)
        }
        ModelId::Otcmv | ModelId::Otcmc => {
            let eps = need(params.eps, model, "eps")?;
            let fiber = FiberSpec::new(x0.to_vec(), 0.0)?;
            let geo = compute_geometry(window, &fiber, &GroundCostConfig::default())?;
            let rho = need(params.rho_scale, model, "rho_scale")? * rho_min(&geo.kappa, eps)?;
            let spec = ProblemSpec::new(window.clone(), fiber, AmbiguitySpec::new(rho, eps)?, loss_for(model, params)?)?
                .with_feasible(feasible.clone())?;
            solve_allocation(&spec, opts)
        }
    }
}
