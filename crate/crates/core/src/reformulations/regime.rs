//! Regime routing over (γ, ε, ρ) and the data-independent uninformative
//! regime.

use serde::{Deserialize, Serialize};

use super::ProblemSpec;
use crate::error::{Error, RegimeKind, Result};
use crate::feasibility::{eps_lower, rho_max, rho_min, REGIME_TOL};
use crate::geometry::compute_geometry;
use crate::loss::{dot, loss_of_return};
use crate::types::{LossSpec, SupportSpec, Transport};

/// Which handler a spec is dispatched to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// γ = 0, ε > 0: second-order cone program.
    Singleton,
    /// γ > 0, ε > 0: semidefinite program over 𝒱.
    Fiber,
    /// γ > 0, ε = 0, ρ < ρ_max: replace ε by ε̲, then [`Route::Fiber`].
    ReduceNullEps,
    /// γ = ε = 0, or γ > 0, ε = 0, ρ > ρ_max.
    Uninformative,
    /// Type-∞ transport.
    TypeInfty,
}

fn require_whole_space(spec: &ProblemSpec, what: &str) -> Result<()> {
    if matches!(spec.support, SupportSpec::WholeSpace) {
        Ok(())
    } else {
        Err(Error::regime(
            RegimeKind::WrongBuilder,
            format!("{what} requires whole-space return support"),
        ))
    }
}

fn check_rho_min(spec: &ProblemSpec, kappa: &[f64]) -> Result<()> {
    let rmin = rho_min(kappa, spec.ambiguity.eps)?;
    if spec.ambiguity.rho <= rmin + REGIME_TOL {
        return Err(Error::regime(
            RegimeKind::RhoBelowMin,
            format!(
                "rho = {} does not exceed rho_min = {rmin}: no distribution in the ball puts mass {} on the fiber",
                spec.ambiguity.rho, spec.ambiguity.eps
            ),
        ));
    }
    Ok(())
}

/// Classifies `spec`, raising regime errors for infeasible or boundary
/// parameter choices.
pub fn route(spec: &ProblemSpec) -> Result<Route> {
    spec.validate()?;
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    if spec.ambiguity.transport == Transport::TypeInfinity {
        require_whole_space(spec, "the type-infinity reformulation")?;
        let kmin = geo.kappa.iter().copied().fold(f64::INFINITY, f64::min);
        if spec.ambiguity.rho <= kmin + REGIME_TOL {
            return Err(Error::regime(
                RegimeKind::RhoBelowMin,
                format!("rho = {} does not exceed min kappa = {kmin}", spec.ambiguity.rho),
            ));
        }
        return Ok(Route::TypeInfty);
    }
    let eps = spec.ambiguity.eps;
    if spec.fiber.is_singleton() {
        if eps == 0.0 {
            return Ok(Route::Uninformative);
        }
        require_whole_space(spec, "the singleton-fiber reformulation")?;
        check_rho_min(spec, &geo.kappa)?;
        return Ok(Route::Singleton);
    }
    if eps > 0.0 {
        check_rho_min(spec, &geo.kappa)?;
        return Ok(Route::Fiber);
    }
    let rmax = rho_max(&geo.d, &geo.i1);
    let rho = spec.ambiguity.rho;
    if (rho - rmax).abs() <= REGIME_TOL {
        return Err(Error::regime(
            RegimeKind::Boundary,
            format!("rho = {rho} is within {REGIME_TOL:e} of rho_max = {rmax}; this boundary is left unresolved"),
        ));
    }
    if rho > rmax {
        Ok(Route::Uninformative)
    } else {
        Ok(Route::ReduceNullEps)
    }
}

/// Marker for parameter choices whose worst case is sup over 𝒴 of the loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UninformativeRegime {
    pub reason: String,
    pub loss: LossSpec,
    pub support: SupportSpec,
}

impl UninformativeRegime {
    pub fn for_spec(spec: &ProblemSpec) -> Self {
        let reason = if spec.fiber.is_singleton() {
            "gamma = eps = 0: the adversary can place a vanishing mass anywhere on the fiber".to_string()
        } else {
            format!("eps = 0 and rho = {} exceeds rho_max: the fiber can be emptied", spec.ambiguity.rho)
        };
        UninformativeRegime {
            reason,
            loss: spec.loss.clone(),
            support: spec.support.clone(),
        }
    }

    /// sup_{y ∈ 𝒴} ℓ(y, α, β); +∞ when unbounded.
    pub fn value(&self, alpha: &[f64], beta: f64) -> f64 {
        uninformative_sup(alpha, beta, &self.loss, &self.support)
    }

    pub fn into_error(self) -> Error {
        Error::regime(
            RegimeKind::Uninformative,
            format!("uninformative regime ({}); the worst case is sup over the support of the loss", self.reason),
        )
    }
}

/// sup_{y ∈ 𝒴} ℓ(y, α, β).
///
/// The loss depends on y only through z = yᵀα and is convex in z, so over
/// an ellipsoid the sup sits at an end of the interval
/// αᵀc ± r·√(αᵀQ⁻¹α) traced by z.
pub fn uninformative_sup(alpha: &[f64], beta: f64, loss: &LossSpec, support: &SupportSpec) -> f64 {
    let nonzero = alpha.iter().any(|&a| a != 0.0);
    match support {
        SupportSpec::WholeSpace => {
            if nonzero {
                f64::INFINITY
            } else {
                loss_of_return(0.0, beta, loss)
            }
        }
        SupportSpec::Ellipsoid(e) => {
            let (center, shape, r2) = e.canonical();
            let a = nalgebra::DVector::from_column_slice(alpha);
            let half = r2.max(0.0).sqrt() * (a.dot(&(&shape * &a))).max(0.0).sqrt();
            let mid = dot(alpha, &center);
            loss_of_return(mid - half, beta, loss).max(loss_of_return(mid + half, beta, loss))
        }
    }
}

/// Result of [`reduce_null_eps`].
#[derive(Debug, Clone, PartialEq)]
pub enum NullEpsReduction {
    /// Same spec with ε replaced by ε̲.
    Reduced(ProblemSpec),
    Uninformative(UninformativeRegime),
}

/// Replaces ε = 0 by the implied floor ε̲ when ρ < ρ_max.
pub fn reduce_null_eps(spec: &ProblemSpec) -> Result<NullEpsReduction> {
    if spec.ambiguity.eps != 0.0 || spec.fiber.is_singleton() {
        return Err(Error::InvalidParameter(
            "reduce_null_eps expects eps = 0 and gamma > 0".into(),
        ));
    }
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost)?;
    let rmax = rho_max(&geo.d, &geo.i1);
    let rho = spec.ambiguity.rho;
    if (rho - rmax).abs() <= REGIME_TOL {
        return Err(Error::regime(
            RegimeKind::Boundary,
            format!("rho = {rho} is within {REGIME_TOL:e} of rho_max = {rmax}; this boundary is left unresolved"),
        ));
    }
    if rho > rmax {
        return Ok(NullEpsReduction::Uninformative(UninformativeRegime::for_spec(spec)));
    }
    let floor = eps_lower(&geo.d, &geo.i1, rho)?;
    let mut reduced = spec.clone();
    reduced.ambiguity.eps = floor;
    Ok(NullEpsReduction::Reduced(reduced))
}
