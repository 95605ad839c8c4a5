//! Ground costs, projections onto the fiber and the per-sample statistics
//! κᵢ (cost to enter the fiber) and dᵢ (cost to reach its boundary).
//!
//! Every supported covariate cost is a squared norm, so the fiber is a
//! norm ball of radius √γ around x₀. For any norm the radial point
//! x₀ + r·(x − x₀)/‖x − x₀‖ attains the triangle-inequality bound, which
//! gives closed forms for both the projection and the boundary distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, RegimeKind, Result};
use crate::types::{FiberSpec, SampleSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum XCost {
    /// ‖x − x'‖₂².
    #[default]
    SquaredEuclidean,
    /// ‖x − x'‖_p² with p ∈ [1, ∞]; `p = inf` is accepted as "inf" in JSON.
    SquaredPNorm {
        #[serde(with = "p_serde")]
        p: f64,
    },
}

mod p_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        if p.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*p)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum P {
            Num(f64),
            Str(String),
        }
        match P::deserialize(d)? {
            P::Num(v) => Ok(v),
            P::Str(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
            P::Str(s) => Err(serde::de::Error::custom(format!("invalid p-norm exponent {s:?}"))),
        }
    }
}

impl XCost {
    pub fn validate(&self) -> Result<()> {
        if let XCost::SquaredPNorm { p } = self {
            if !(*p >= 1.0) {
                return Err(Error::InvalidParameter(format!("p-norm exponent must be >= 1, got {p}")));
            }
        }
        Ok(())
    }

    /// The underlying (unsquared) norm.
    pub fn norm(&self, v: &[f64]) -> f64 {
        match *self {
            XCost::SquaredEuclidean => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            XCost::SquaredPNorm { p } if p.is_infinite() => v.iter().fold(0.0_f64, |m, a| m.max(a.abs())),
            XCost::SquaredPNorm { p } if p == 1.0 => v.iter().map(|a| a.abs()).sum(),
            XCost::SquaredPNorm { p } if p == 2.0 => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
            XCost::SquaredPNorm { p } => v.iter().map(|a| a.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// Distance ‖a − b‖ in the underlying norm.
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }

    /// 𝔻_𝒳(a, b).
    pub fn cost(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            XCost::SquaredEuclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            _ => self.dist(a, b).powi(2),
        }
    }
}

/// Ground costs on 𝒳 × 𝒴. The return-space cost is always ‖y − y'‖₂².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct GroundCostConfig {
    #[serde(default)]
    pub x_cost: XCost,
}

impl GroundCostConfig {
    pub fn y_cost(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

/// Radial point at norm-distance `radius` from `x0` in the direction of
/// `x`; when `x = x0` the first coordinate axis is used.
pub(crate) fn radial_point(x: &[f64], x0: &[f64], radius: f64, cost: &XCost) -> Vec<f64> {
    let dist = cost.dist(x, x0);
    if dist > 0.0 {
        x0.iter().zip(x).map(|(c, v)| c + radius * (v - c) / dist).collect()
    } else {
        let mut e = vec![0.0; x0.len()];
        if let Some(first) = e.first_mut() {
            *first = 1.0;
        }
        let scale = radius / cost.norm(&e).max(f64::MIN_POSITIVE);
        x0.iter().zip(&e).map(|(c, v)| c + scale * v).collect()
    }
}

/// Projection x̂ᵖ of `x` onto 𝒩_γ(x₀) and κ = 𝔻_𝒳(x̂ᵖ, x).
pub fn project_to_fiber(x: &[f64], fiber: &FiberSpec, cfg: &GroundCostConfig) -> (Vec<f64>, f64) {
    let r = fiber.gamma.sqrt();
    let dist = cfg.x_cost.dist(x, &fiber.x0);
    if cfg.x_cost.cost(x, &fiber.x0) <= fiber.gamma {
        return (x.to_vec(), 0.0);
    }
    let xp = radial_point(x, &fiber.x0, r, &cfg.x_cost);
    (xp, (dist - r).powi(2))
}

/// Per-sample fiber statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryStats {
    /// κᵢ: minimal cost to move x̂ᵢ into the fiber.
    pub kappa: Vec<f64>,
    /// dᵢ: cost from x̂ᵢ to the fiber boundary.
    pub d: Vec<f64>,
    /// 𝔻_𝒳(x₀, x̂ᵢ).
    pub dist_x0: Vec<f64>,
    /// Samples inside the fiber, ascending.
    pub i1: Vec<usize>,
    /// Samples outside the fiber, ascending.
    pub i2: Vec<usize>,
    /// x̂ᵢᵖ.
    pub projections: Vec<Vec<f64>>,
}

impl GeometryStats {
    pub fn n_samples(&self) -> usize {
        self.kappa.len()
    }

    pub fn in_fiber(&self, i: usize) -> bool {
        self.i1.binary_search(&i).is_ok()
    }
}

pub fn compute_geometry(data: &SampleSet, fiber: &FiberSpec, cfg: &GroundCostConfig) -> Result<GeometryStats> {
    fiber.validate()?;
    cfg.x_cost.validate()?;
    if fiber.x0.len() != data.n() {
        return Err(Error::Dimension(format!(
            "x0 has {} entries, covariates have {}",
            fiber.x0.len(),
            data.n()
        )));
    }
    let r = fiber.gamma.sqrt();
    let n = data.len();
    let mut g = GeometryStats {
        kappa: Vec::with_capacity(n),
        d: Vec::with_capacity(n),
        dist_x0: Vec::with_capacity(n),
        i1: Vec::new(),
        i2: Vec::new(),
        projections: Vec::with_capacity(n),
    };
    for (i, s) in data.iter().enumerate() {
        let cost = cfg.x_cost.cost(&s.x, &fiber.x0);
        let dist = cfg.x_cost.dist(&s.x, &fiber.x0);
        let (xp, kappa) = project_to_fiber(&s.x, fiber, cfg);
        if cost <= fiber.gamma {
            g.i1.push(i);
        } else {
            g.i2.push(i);
        }
        g.kappa.push(kappa);
        g.d.push((r - dist).powi(2));
        g.dist_x0.push(cost);
        g.projections.push(xp);
    }
    Ok(g)
}

/// Index sets of the type-∞ reformulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeInftyIndex {
    pub j: Vec<usize>,
    pub j1: Vec<usize>,
    pub j2: Vec<usize>,
}

impl TypeInftyIndex {
    pub fn is_j1(&self, i: usize) -> bool {
        self.j1.binary_search(&i).is_ok()
    }
}

/// 𝒥 = {i : 𝔻_𝒳(x₀, x̂ᵢ) ≤ ρ + γ}, 𝒥₁ = {i ∈ 𝒥 : 𝔻_𝒳(x₀, x̂ᵢ) + ρ ≤ γ}.
pub fn type_infty_index(
    data: &SampleSet,
    fiber: &FiberSpec,
    rho: f64,
    cfg: &GroundCostConfig,
) -> Result<TypeInftyIndex> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be > 0, got {rho}")));
    }
    fiber.validate()?;
    let mut idx = TypeInftyIndex {
        j: Vec::new(),
        j1: Vec::new(),
        j2: Vec::new(),
    };
    for (i, s) in data.iter().enumerate() {
        let c = cfg.x_cost.cost(&fiber.x0, &s.x);
        if c <= rho + fiber.gamma {
            idx.j.push(i);
            if c + rho <= fiber.gamma {
                idx.j1.push(i);
            } else {
                idx.j2.push(i);
            }
        }
    }
    if idx.j.is_empty() {
        return Err(Error::regime(
            RegimeKind::EmptyTypeInftySet,
            "no sample can reach the fiber under the type-infinity budget",
        ));
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GroundCostConfig {
        GroundCostConfig::default()
    }

    #[test]
    fn projection_examples() {
        let f = FiberSpec::new(vec![0.0, 0.0], 1.0).unwrap();
        let (xp, k) = project_to_fiber(&[2.0, 0.0], &f, &cfg());
        assert_eq!(xp, vec![1.0, 0.0]);
        assert_eq!(k, 1.0);
        let (xp, k) = project_to_fiber(&[0.5, 0.1], &f, &cfg());
        assert_eq!(xp, vec![0.5, 0.1]);
        assert_eq!(k, 0.0);
        let f1 = FiberSpec::new(vec![0.0], 1.0).unwrap();
        let (xp, k) = project_to_fiber(&[3.0], &f1, &cfg());
        assert_eq!(xp, vec![1.0]);
        assert_eq!(k, 4.0);
    }

    #[test]
    fn p_norm_projection_is_radial() {
        let c = GroundCostConfig {
            x_cost: XCost::SquaredPNorm { p: 1.0 },
        };
        let f = FiberSpec::new(vec![0.0, 0.0], 1.0).unwrap();
        let (xp, k) = project_to_fiber(&[2.0, 2.0], &f, &c);
        assert!((xp[0] - 0.5).abs() < 1e-15 && (xp[1] - 0.5).abs() < 1e-15);
        assert!((k - 9.0).abs() < 1e-12);
    }
}
