//! Mean-variance and mean-CVaR losses.
//!
//! Both depend on `y` only through the portfolio return `z = yᵀα`, so the
//! scalar helpers below take `z` directly.

use crate::error::{Error, Result};
use crate::types::{LossSpec, LossVariant};

/// ℓ(y, α, β) for the configured loss.
pub fn eval_loss(y: &[f64], alpha: &[f64], beta: f64, loss: &LossSpec) -> Result<f64> {
    if y.len() != alpha.len() {
        return Err(Error::Dimension(format!(
            "return vector has {} entries, alpha has {}",
            y.len(),
            alpha.len()
        )));
    }
    loss.validate()?;
    Ok(loss_of_return(dot(y, alpha), beta, loss))
}

/// ℓ as a function of the portfolio return z = yᵀα.
pub fn loss_of_return(z: f64, beta: f64, loss: &LossSpec) -> f64 {
    match loss.variant {
        LossVariant::MeanVariance => mv_loss(z, beta, loss.eta),
        LossVariant::MeanCvar => cvar_loss_hinge(z, beta, loss.eta, loss.tau),
    }
}

/// (z − β)² − ηz.
pub fn mv_loss(z: f64, beta: f64, eta: f64) -> f64 {
    (z - beta).powi(2) - eta * z
}

/// −ηz + β + τ⁻¹(−z − β)⁺.
pub fn cvar_loss_hinge(z: f64, beta: f64, eta: f64, tau: f64) -> f64 {
    -eta * z + beta + (-z - beta).max(0.0) / tau
}

/// max{−ηz + β, −(η + τ⁻¹)z + (1 − τ⁻¹)β}.
pub fn cvar_loss_max(z: f64, beta: f64, eta: f64, tau: f64) -> f64 {
    let a = -eta * z + beta;
    let b = -(eta + 1.0 / tau) * z + (1.0 - 1.0 / tau) * beta;
    a.max(b)
}

/// The two affine pieces of the mean-CVaR loss as (slope on z, coefficient
/// on β): ℓ = max_k (a_k z + b_k β).
pub fn cvar_pieces(eta: f64, tau: f64) -> [(f64, f64); 2] {
    [(-eta, 1.0), (-(eta + 1.0 / tau), 1.0 - 1.0 / tau)]
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let mv = LossSpec::mean_variance(0.0).unwrap();
        assert_eq!(eval_loss(&[2.0], &[1.0], 1.0, &mv).unwrap(), 1.0);

        let cv = LossSpec::mean_cvar(1.0, 0.5).unwrap();
        assert_eq!(eval_loss(&[1.0], &[1.0], 0.0, &cv).unwrap(), -1.0);
        assert_eq!(cvar_loss_max(1.0, 0.0, 1.0, 0.5), -1.0);

        let cv0 = LossSpec::mean_cvar(0.0, 0.5).unwrap();
        assert_eq!(eval_loss(&[-1.0], &[1.0], 0.0, &cv0).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mv = LossSpec::mean_variance(0.0).unwrap();
        assert!(eval_loss(&[1.0, 2.0], &[1.0], 0.0, &mv).is_err());
        assert!(LossSpec::mean_cvar(1.0, 1.0).is_err());
        assert!(LossSpec::mean_cvar(1.0, 0.0).is_err());
    }
}
