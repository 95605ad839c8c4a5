use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRADING_DAYS: f64 = 252.0;

/// Realized returns rₜ = αₜᵀyₜ with the allocation trail, indexed by date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub dates: Vec<usize>,
    pub returns: Vec<f64>,
    pub allocations: Vec<Vec<f64>>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<usize>, returns: Vec<f64>, allocations: Vec<Vec<f64>>) -> Result<Self> {
        if dates.len() != returns.len() || dates.len() != allocations.len() {
            return Err(Error::Dimension("dates, returns and allocations must align".into()));
        }
        Ok(ReturnSeries {
            dates,
            returns,
            allocations,
        })
    }

    pub fn empty() -> Self {
        ReturnSeries {
            dates: Vec::new(),
            returns: Vec::new(),
            allocations: Vec::new(),
        }
    }

    pub fn push(&mut self, date: usize, ret: f64, alpha: Vec<f64>) {
        self.dates.push(date);
        self.returns.push(ret);
        self.allocations.push(alpha);
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// One row of a summary table. `mean` and `std_dev` are annualized, so
/// `sharpe = mean / std_dev`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mean: f64,
    #[serde(rename = "stdDev")]
    pub std_dev: f64,
    pub sharpe: f64,
    #[serde(rename = "maxDraw")]
    pub max_draw: f64,
    #[serde(rename = "tradeVol")]
    pub trade_vol: f64,
}

/// (mean, sample standard deviation).
pub fn mean_std(r: &[f64]) -> Result<(f64, f64)> {
    if r.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 returns, got {}", r.len())));
    }
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// √252 · mean / std on per-period returns.
pub fn annualized_sharpe(r: &[f64]) -> Result<f64> {
    let (mean, std) = mean_std(r)?;
    if !(std > 0.0) {
        return Err(Error::Numeric("zero return volatility: Sharpe ratio undefined".into()));
    }
    Ok(TRADING_DAYS.sqrt() * mean / std)
}

/// Largest peak-to-trough loss of a wealth curve, relative to the peak.
pub fn max_drawdown(curve: &[f64]) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0_f64;
    for &w in curve {
        peak = peak.max(w);
        if peak > 0.0 {
            worst = worst.max((peak - w) / peak);
        }
    }
    worst
}

/// Wealth curve of compounded returns starting at 1.
pub fn wealth_curve(r: &[f64]) -> Vec<f64> {
    let mut curve = Vec::with_capacity(r.len() + 1);
    let mut w = 1.0;
    curve.push(w);
    for v in r {
        w *= 1.0 + v;
        curve.push(w);
    }
    curve
}

/// Annualized ℓ₁ turnover of target weights.
pub fn trade_volume(allocations: &[Vec<f64>]) -> f64 {
    if allocations.is_empty() {
        return 0.0;
    }
    let total: f64 = allocations
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .sum();
    total * TRADING_DAYS / allocations.len() as f64
}

pub fn compute_metrics(s: &ReturnSeries) -> Result<Metrics> {
    let (mean, std) = mean_std(&s.returns)?;
    if !(std > 0.0) {
        return Err(Error::Numeric("zero return volatility: Sharpe ratio undefined".into()));
    }
    let (mean_a, std_a) = (mean * TRADING_DAYS, std * TRADING_DAYS.sqrt());
    Ok(Metrics {
        mean: mean_a,
        std_dev: std_a,
        sharpe: mean_a / std_a,
        max_draw: max_drawdown(&wealth_curve(&s.returns)),
        trade_vol: trade_volume(&s.allocations),
    })
}

/// Table row across replications: mean, stdDev and sharpe from the pooled
/// returns, maxDraw and tradeVol averaged over replications.
pub fn aggregate_metrics(series: &[ReturnSeries]) -> Result<Metrics> {
    let pooled: Vec<f64> = series.iter().flat_map(|s| s.returns.iter().copied()).collect();
    let (mean, std) = mean_std(&pooled)?;
    if !(std > 0.0) {
        return Err(Error::Numeric("zero return volatility: Sharpe ratio undefined".into()));
    }
    let (mean_a, std_a) = (mean * TRADING_DAYS, std * TRADING_DAYS.sqrt());
    let k = series.len() as f64;
    Ok(Metrics {
        mean: mean_a,
        std_dev: std_a,
        sharpe: mean_a / std_a,
        max_draw: series.iter().map(|s| max_drawdown(&wealth_curve(&s.returns))).sum::<f64>() / k,
        trade_vol: series.iter().map(|s| trade_volume(&s.allocations)).sum::<f64>() / k,
    })
}
