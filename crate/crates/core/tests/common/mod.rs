//! Oracles written independently of the library code paths they check.
#![allow(dead_code)]

use condport_core::feasibility::rho_min;
use condport_core::geometry::{compute_geometry, GroundCostConfig};
use condport_core::loss::cvar_pieces;
use condport_core::{AmbiguitySpec, FiberSpec, LossSpec, LossVariant, ProblemSpec, Sample, SampleSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------- knapsacks

/// min (1/N) Σ κᵢυᵢ over {υ ∈ [0,1]ᴺ, Σ υ ≥ Nε} by enumerating its vertices:
/// every coordinate in {0, 1} except at most one, fixed by the tight sum.
pub fn rho_min_vertices(kappa: &[f64], eps: f64) -> f64 {
    let n = kappa.len();
    let target = n as f64 * eps;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let ones: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let base: f64 = ones.iter().map(|&i| kappa[i]).sum();
        let count = ones.len() as f64;
        if count >= target - 1e-12 {
            best = best.min(base);
        }
        for j in (0..n).filter(|j| mask >> j & 1 == 0) {
            let frac = target - count;
            if (0.0..=1.0).contains(&frac) {
                best = best.min(base + frac * kappa[j]);
            }
        }
    }
    best / n as f64
}

/// min (1/N) Σ_{𝓘₁} pᵢ over {p ∈ [0,1]^{𝓘₁}, Σ (1 − pᵢ)dᵢ ≤ Nρ} by vertex
/// enumeration.
pub fn eps_lower_vertices(d: &[f64], i1: &[usize], rho: f64) -> f64 {
    let k = i1.len();
    let budget = d.len() as f64 * rho;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << k) {
        // Bit set: pᵢ = 0 (mass removed).
        let removed: f64 = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| d[i1[b]]).sum();
        let kept = (0..k).filter(|b| mask >> b & 1 == 0).count() as f64;
        if removed <= budget + 1e-12 {
            best = best.min(kept);
        }
        for b in (0..k).filter(|b| mask >> b & 1 == 0) {
            let di = d[i1[b]];
            if di > 0.0 {
                let frac_removed = (budget - removed) / di;
                if (0.0..=1.0).contains(&frac_removed) {
                    best = best.min(kept - frac_removed);
                }
            }
        }
    }
    best / d.len() as f64
}

// ------------------------------------------------------------- scalar dual

/// sup_y { ℓ(y)/ε − λ‖y − ŷ‖² } in closed form. Only z = αᵀy matters, and
/// shifting z by s costs s²/‖α‖².
pub fn inner_sup(z_hat: f64, a2: f64, beta: f64, lambda: f64, eps: f64, loss: &LossSpec) -> f64 {
    match loss.variant {
        LossVariant::MeanVariance => {
            let base = ((z_hat - beta).powi(2) - loss.eta * z_hat) / eps;
            if a2 == 0.0 {
                return base;
            }
            let c = lambda / a2 - 1.0 / eps;
            if c <= 0.0 {
                return f64::INFINITY;
            }
            let slope = (2.0 * (z_hat - beta) - loss.eta) / eps;
            base + slope * slope / (4.0 * c)
        }
        LossVariant::MeanCvar => cvar_pieces(loss.eta, loss.tau)
            .iter()
            .map(|&(a, b)| {
                let base = (a * z_hat + b * beta) / eps;
                if a2 == 0.0 || a == 0.0 {
                    base
                } else if lambda <= 0.0 {
                    f64::INFINITY
                } else {
                    base + a * a * a2 / (4.0 * lambda * eps * eps)
                }
            })
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

/// inf_{λ₂} ρλ₁ + ελ₂ + (1/N) Σ (Sᵢ(λ₁) − κᵢλ₁ − λ₂)⁺; the inner minimum is
/// attained at a breakpoint.
fn dual_at(lambda1: f64, z: &[f64], a2: f64, kappa: &[f64], beta: f64, rho: f64, eps: f64, loss: &LossSpec) -> f64 {
    let n = z.len() as f64;
    let v: Vec<f64> = z
        .iter()
        .zip(kappa)
        .map(|(&zi, &k)| inner_sup(zi, a2, beta, lambda1, eps, loss) - k * lambda1)
        .collect();
    if v.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    let best = v
        .iter()
        .map(|&l2| eps * l2 + v.iter().map(|&vi| (vi - l2).max(0.0)).sum::<f64>() / n)
        .fold(f64::INFINITY, f64::min);
    rho * lambda1 + best
}

/// The two-variable dual of the singleton-fiber worst case at fixed (α, β):
/// log-spaced grid over λ₁ followed by golden-section refinement.
pub fn scalar_dual(alpha: &[f64], beta: f64, spec: &ProblemSpec) -> f64 {
    let geo = compute_geometry(&spec.data, &spec.fiber, &spec.cost).unwrap();
    let z: Vec<f64> = spec.data.iter().map(|s| dot(&s.y, alpha)).collect();
    let a2 = dot(alpha, alpha);
    let (rho, eps) = (spec.ambiguity.rho, spec.ambiguity.eps);
    let lo = match spec.loss.variant {
        LossVariant::MeanVariance => a2 / eps,
        LossVariant::MeanCvar => 0.0,
    };
    let f = |l: f64| dual_at(l, &z, a2, &geo.kappa, beta, rho, eps, &spec.loss);
    let pts: Vec<f64> = (0..=4000).map(|k| lo + 10f64.powf(-10.0 + 14.0 * k as f64 / 4000.0)).collect();
    let vals: Vec<f64> = pts.iter().map(|&l| f(l)).collect();
    let k = (0..pts.len()).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let (mut a, mut b) = (if k == 0 { lo } else { pts[k - 1] }, pts[(k + 1).min(pts.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    vals[k].min(f(0.5 * (a + b)))
}

// ------------------------------------------------------------- ball search

/// max ℓ over the ball ‖y − ŷ‖₂² ≤ r by a polar grid (m ≤ 2).
pub fn ball_grid_max(alpha: &[f64], beta: f64, y_hat: &[f64], r: f64, loss: &LossSpec) -> f64 {
    let rad = r.sqrt();
    let eval = |y: &[f64]| condport_core::eval_loss(y, alpha, beta, loss).unwrap();
    let mut best = f64::NEG_INFINITY;
    match y_hat.len() {
        1 => {
            for k in 0..=20000 {
                let t = -rad + 2.0 * rad * k as f64 / 20000.0;
                best = best.max(eval(&[y_hat[0] + t]));
            }
        }
        2 => {
            for ri in 0..=40 {
                let rr = rad * ri as f64 / 40.0;
                for k in 0..20000 {
                    let th = std::f64::consts::TAU * k as f64 / 20000.0;
                    best = best.max(eval(&[y_hat[0] + rr * th.cos(), y_hat[1] + rr * th.sin()]));
                }
            }
        }
        _ => panic!("ball_grid_max supports m <= 2"),
    }
    best
}

// --------------------------------------------------------------- instances

pub fn random_samples(rng: &mut ChaCha8Rng, n_samples: usize, n: usize, m: usize) -> SampleSet {
    SampleSet::new(
        (0..n_samples)
            .map(|_| Sample {
                x: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
                y: (0..m).map(|_| rng.random_range(-0.5..0.5)).collect(),
            })
            .collect(),
    )
    .unwrap()
}

pub fn random_simplex(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

pub fn random_loss(rng: &mut ChaCha8Rng, variant: LossVariant) -> LossSpec {
    match variant {
        LossVariant::MeanVariance => LossSpec::mean_variance(rng.random_range(0.0..1.0)).unwrap(),
        LossVariant::MeanCvar => {
            LossSpec::mean_cvar(rng.random_range(0.0..1.0), rng.random_range(0.1..0.9)).unwrap()
        }
    }
}

/// Random type-1 instance with x₀ = 0 and ρ = ρ_min + `margin`.
pub fn random_spec(
    rng: &mut ChaCha8Rng,
    n_samples: usize,
    m: usize,
    gamma: f64,
    eps: f64,
    margin: f64,
    loss: LossSpec,
) -> ProblemSpec {
    let data = random_samples(rng, n_samples, 1, m);
    let fiber = FiberSpec::new(vec![0.0], gamma).unwrap();
    let geo = compute_geometry(&data, &fiber, &GroundCostConfig::default()).unwrap();
    let rho = rho_min(&geo.kappa, eps).unwrap() + margin;
    ProblemSpec::new(data, fiber, AmbiguitySpec::new(rho, eps).unwrap(), loss).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}
