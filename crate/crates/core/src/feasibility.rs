//! Feasibility thresholds ρ_min, ρ_max and the probability floor ε̲.
//!
//! ρ_min and ε̲ are fractional knapsacks: sort by unit cost and fill
//! greedily, with a fractional last item. Ties go to the lower index.

use crate::error::{Error, RegimeKind, Result};

/// Absolute margin used when comparing ρ against ρ_min and ρ_max.
pub const REGIME_TOL: f64 = 1e-9;

fn order_by_cost(cost: &[f64], idx: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut order: Vec<usize> = idx.collect();
    order.sort_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(a.cmp(&b)));
    order
}

/// Optimal υ of min (1/N)Σκᵢυᵢ s.t. υ ∈ [0,1]ᴺ, Συᵢ ≥ Nε, with its value.
pub fn rho_min_plan(kappa: &[f64], eps: f64) -> Result<(f64, Vec<f64>)> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1], got {eps}")));
    }
    if kappa.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(Error::InvalidParameter("kappa must be finite and nonnegative".into()));
    }
    let n = kappa.len();
    let mut need = n as f64 * eps;
    let mut ups = vec![0.0; n];
    let mut total = 0.0;
    for i in order_by_cost(kappa, 0..n) {
        if need <= 0.0 {
            break;
        }
        let take = need.min(1.0);
        ups[i] = take;
        total += kappa[i] * take;
        need -= take;
    }
    Ok((total / n as f64, ups))
}

/// ρ_min(x₀, γ, ε) from the fiber-entry costs κ.
pub fn rho_min(kappa: &[f64], eps: f64) -> Result<f64> {
    rho_min_plan(kappa, eps).map(|(v, _)| v)
}

/// ρ_max(x₀, γ) = (1/N) Σ_{i∈𝓘₁} dᵢ.
pub fn rho_max(d: &[f64], i1: &[usize]) -> f64 {
    if d.is_empty() {
        return 0.0;
    }
    i1.iter().fold(0.0, |acc, &i| acc + d[i]) / d.len() as f64
}

/// Optimal in-fiber retention p of the ε̲ knapsack, with its value.
/// Entries outside 𝓘₁ are zero.
pub fn eps_lower_plan(d: &[f64], i1: &[usize], rho: f64) -> Result<(f64, Vec<f64>)> {
    if !(rho >= 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be >= 0, got {rho}")));
    }
    let rmax = rho_max(d, i1);
    if rho >= rmax {
        return Err(Error::regime(
            RegimeKind::NullProbability,
            format!("rho = {rho} >= rho_max = {rmax}: the adversary can empty the fiber"),
        ));
    }
    let n = d.len();
    let mut budget = n as f64 * rho;
    let mut p = vec![0.0; n];
    for &i in i1 {
        p[i] = 1.0;
    }
    for i in order_by_cost(d, i1.iter().copied()) {
        if d[i] == 0.0 {
            p[i] = 0.0;
            continue;
        }
        if budget <= 0.0 {
            break;
        }
        let removed = (budget / d[i]).min(1.0);
        p[i] = 1.0 - removed;
        budget -= removed * d[i];
    }
    Ok((p.iter().sum::<f64>() / n as f64, p))
}

/// ε̲: the smallest fiber mass any budget-feasible adversary must leave.
pub fn eps_lower(d: &[f64], i1: &[usize], rho: f64) -> Result<f64> {
    eps_lower_plan(d, i1, rho).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        assert_eq!(rho_min(&[1.0, 2.0, 3.0], 2.0 / 3.0).unwrap(), 1.0);
        assert_eq!(rho_min(&[0.0; 4], 0.7).unwrap(), 0.0);
        assert_eq!(rho_min(&[1.0, 5.0], 0.0).unwrap(), 0.0);

        assert_eq!(rho_max(&[0.5, 1.5, 9.0, 9.0], &[0, 1]), 0.5);
        assert_eq!(rho_max(&[3.0, 4.0], &[]), 0.0);
        assert_eq!(rho_max(&[1.0, 1.0], &[0, 1]), 1.0);

        assert_eq!(eps_lower(&[1.0, 1.0], &[0, 1], 0.25).unwrap(), 0.75);
        assert_eq!(eps_lower(&[1.0, 1.0, 4.0], &[0, 1], 0.0).unwrap(), 2.0 / 3.0);
        assert!(eps_lower(&[1.0, 1.0], &[0, 1], 1.0).is_err());
    }

    #[test]
    fn eps_lower_vanishes_at_rho_max() {
        let d = [0.3, 0.7, 0.2];
        let i1 = [0, 1, 2];
        let rmax = rho_max(&d, &i1);
        let v = eps_lower(&d, &i1, rmax * (1.0 - 1e-9)).unwrap();
        assert!(v > 0.0 && v < 1e-8);
    }
}
