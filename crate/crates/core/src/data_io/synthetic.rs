//! Factor-model returns with noisy factor predictors as covariates.
//!
//! Standardized factor shocks uₜ ~ N(0, I) drive returns
//! yₜ = L(μ_f + σ_f uₜ) + σ_ε eₜ, and the covariate is
//! xₜ = c·uₜ + √(1 − c²)·zₜ, so corr(uₜⱼ, xₜⱼ) = c exactly in expectation.
//! Only the statistical structure of factor portfolios is mimicked.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Sample, SampleSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub periods: usize,
    pub assets: usize,
    pub factors: usize,
    /// Target corr(X_raw, X).
    pub correlation: f64,
    /// assets × factors; drawn from the seed when absent.
    pub loadings: Option<Vec<Vec<f64>>>,
    pub factor_mean: f64,
    pub factor_vol: f64,
    pub idio_vol: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            periods: 1000,
            assets: 20,
            factors: 3,
            correlation: 0.1,
            loadings: None,
            factor_mean: 4e-4,
            factor_vol: 0.01,
            idio_vol: 0.01,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.periods == 0 || self.assets == 0 || self.factors == 0 {
            return Err(Error::InvalidParameter("periods, assets and factors must be >= 1".into()));
        }
        if !(self.correlation > 0.0 && self.correlation < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "correlation target must lie in (0, 1), got {}",
                self.correlation
            )));
        }
        if !(self.factor_vol >= 0.0 && self.idio_vol >= 0.0 && self.factor_mean.is_finite()) {
            return Err(Error::InvalidParameter("volatilities must be >= 0 and the mean finite".into()));
        }
        if let Some(l) = &self.loadings {
            if l.len() != self.assets || l.iter().any(|r| r.len() != self.factors) {
                return Err(Error::Dimension(format!(
                    "loadings must be {} x {}",
                    self.assets, self.factors
                )));
            }
            if l.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("loadings must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub samples: SampleSet,
    /// Standardized factor shocks uₜ (the raw predictors), periods × factors.
    pub factors: Vec<Vec<f64>>,
    pub loadings: Vec<Vec<f64>>,
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (m, k) = (cfg.assets, cfg.factors);
    let loadings = match &cfg.loadings {
        Some(l) => l.clone(),
        None => {
            // Market-like first factor, style factors centred at zero.
            let market = Normal::new(1.0, 0.3).expect("valid normal");
            let style = Normal::new(0.0, 0.5).expect("valid normal");
            (0..m)
                .map(|_| {
                    (0..k)
                        .map(|j| if j == 0 { market.sample(&mut rng) } else { style.sample(&mut rng) })
                        .collect()
                })
                .collect()
        }
    };
    let c = cfg.correlation;
    let s = (1.0 - c * c).sqrt();
    let mut samples = Vec::with_capacity(cfg.periods);
    let mut factors = Vec::with_capacity(cfg.periods);
    for _ in 0..cfg.periods {
        let u: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x: Vec<f64> = u
            .iter()
            .map(|&uj| {
                let z: f64 = StandardNormal.sample(&mut rng);
                c * uj + s * z
            })
            .collect();
        let y: Vec<f64> = loadings
            .iter()
            .map(|row| {
                let e: f64 = StandardNormal.sample(&mut rng);
                let sys: f64 = row.iter().zip(&u).map(|(l, uj)| l * (cfg.factor_mean + cfg.factor_vol * uj)).sum();
                sys + cfg.idio_vol * e
            })
            .collect();
        samples.push(Sample { x, y });
        factors.push(u);
    }
    Ok(SyntheticData {
        samples: SampleSet::new(samples)?,
        factors,
        loadings,
    })
}
