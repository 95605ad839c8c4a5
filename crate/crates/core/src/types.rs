//! Data model shared by every module: samples, fiber and ambiguity
//! parameters, loss and support specifications, and the feasible set of
//! portfolio weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One covariate-return pair (x̂ᵢ, ŷᵢ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Ordered empirical sample. Index `i` is meaningful and stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleSetRepr", into = "SampleSetRepr")]
pub struct SampleSet {
    samples: Vec<Sample>,
    n: usize,
    m: usize,
}

#[derive(Serialize, Deserialize)]
struct SampleSetRepr {
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl TryFrom<SampleSetRepr> for SampleSet {
    type Error = Error;
    fn try_from(r: SampleSetRepr) -> Result<Self> {
        SampleSet::from_columns(r.x, r.y)
    }
}

impl From<SampleSet> for SampleSetRepr {
    fn from(s: SampleSet) -> Self {
        let (x, y) = s.samples.into_iter().map(|s| (s.x, s.y)).unzip();
        SampleSetRepr { x, y }
    }
}

impl SampleSet {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidParameter("sample set must contain at least one sample".into()))?;
        let (n, m) = (first.x.len(), first.y.len());
        if m == 0 {
            return Err(Error::Dimension("return vectors must be non-empty".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.x.len() != n || s.y.len() != m {
                return Err(Error::Dimension(format!(
                    "sample {i} has dimensions ({}, {}), expected ({n}, {m})",
                    s.x.len(),
                    s.y.len()
                )));
            }
            if s.x.iter().chain(&s.y).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample {i} contains a non-finite value")));
            }
        }
        Ok(SampleSet { samples, n, m })
    }

    pub fn from_columns(xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Dimension(format!(
                "{} covariate rows but {} return rows",
                xs.len(),
                ys.len()
            )));
        }
        Self::new(xs.into_iter().zip(ys).map(|(x, y)| Sample { x, y }).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Covariate dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of assets.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.samples[i].x
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.samples[i].y
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// Samples at the given indices, in that order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut out = Vec::with_capacity(idx.len());
        for &i in idx {
            let s = self
                .samples
                .get(i)
                .ok_or_else(|| Error::Dimension(format!("sample index {i} out of range")))?;
            out.push(s.clone());
        }
        Self::new(out)
    }

    /// Contiguous rows `range`.
    pub fn window(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.end > self.len() {
            return Err(Error::Dimension(format!(
                "window {range:?} exceeds {} samples",
                self.len()
            )));
        }
        Self::new(self.samples[range].to_vec())
    }

    /// Keeps only the listed return columns.
    pub fn select_assets(&self, assets: &[usize]) -> Result<Self> {
        if let Some(&j) = assets.iter().find(|&&j| j >= self.m) {
            return Err(Error::Dimension(format!("asset index {j} out of range")));
        }
        Self::new(
            self.samples
                .iter()
                .map(|s| Sample {
                    x: s.x.clone(),
                    y: assets.iter().map(|&j| s.y[j]).collect(),
                })
                .collect(),
        )
    }
}

/// Conditioning set 𝒩_γ(x₀) = {x : 𝔻_𝒳(x, x₀) ≤ γ}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub x0: Vec<f64>,
    pub gamma: f64,
}

impl FiberSpec {
    pub fn new(x0: Vec<f64>, gamma: f64) -> Result<Self> {
        let f = FiberSpec { x0, gamma };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be finite and >= 0, got {}", self.gamma)));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("x0 must be finite".into()));
        }
        Ok(())
    }

    pub fn is_singleton(&self) -> bool {
        self.gamma == 0.0
    }
}

/// Which optimal transport cost defines the ambiguity ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    #[default]
    Type1,
    TypeInfinity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySpec {
    pub rho: f64,
    pub eps: f64,
    #[serde(default)]
    pub transport: Transport,
}

impl AmbiguitySpec {
    pub fn new(rho: f64, eps: f64) -> Result<Self> {
        let a = AmbiguitySpec {
            rho,
            eps,
            transport: Transport::Type1,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn type_infinity(rho: f64) -> Result<Self> {
        let a = AmbiguitySpec {
            rho,
            eps: 0.0,
            transport: Transport::TypeInfinity,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be finite and > 0, got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::InvalidParameter(format!("eps must lie in [0, 1], got {}", self.eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    MeanVariance,
    MeanCvar,
}

pub const DEFAULT_TAU: f64 = 0.05;

fn default_tau() -> f64 {
    DEFAULT_TAU
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub variant: LossVariant,
    pub eta: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

impl LossSpec {
    pub fn mean_variance(eta: f64) -> Result<Self> {
        let l = LossSpec {
            variant: LossVariant::MeanVariance,
            eta,
            tau: DEFAULT_TAU,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn mean_cvar(eta: f64, tau: f64) -> Result<Self> {
        let l = LossSpec {
            variant: LossVariant::MeanCvar,
            eta,
            tau,
        };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParameter(format!("eta must be finite and >= 0, got {}", self.eta)));
        }
        if self.variant == LossVariant::MeanCvar && !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParameter(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        Ok(())
    }
}

/// Box, budget and tradability constraints on α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FeasibleSetRepr", into = "FeasibleSetRepr")]
pub struct FeasibleSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
    budget: bool,
    tradable: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct FeasibleSetRepr {
    lower: Vec<f64>,
    upper: Vec<f64>,
    budget: bool,
    tradable: Vec<bool>,
}

impl TryFrom<FeasibleSetRepr> for FeasibleSet {
    type Error = Error;
    fn try_from(r: FeasibleSetRepr) -> Result<Self> {
        FeasibleSet::new(r.lower, r.upper, r.budget, r.tradable)
    }
}

impl From<FeasibleSet> for FeasibleSetRepr {
    fn from(f: FeasibleSet) -> Self {
        FeasibleSetRepr {
            lower: f.lower,
            upper: f.upper,
            budget: f.budget,
            tradable: f.tradable,
        }
    }
}

impl FeasibleSet {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, budget: bool, tradable: Vec<bool>) -> Result<Self> {
        let m = lower.len();
        if upper.len() != m || tradable.len() != m || m == 0 {
            return Err(Error::Dimension("feasible set bounds and mask must share a non-zero length".into()));
        }
        for j in 0..m {
            if lower[j].is_nan() || upper[j].is_nan() || lower[j] > upper[j] {
                return Err(Error::InvalidParameter(format!("asset {j}: empty bound interval")));
            }
            if !tradable[j] && !(lower[j] <= 0.0 && upper[j] >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "asset {j} is untradable but its bounds exclude zero"
                )));
            }
        }
        if budget {
            let lo: f64 = (0..m).filter(|&j| tradable[j]).map(|j| lower[j]).sum();
            let hi: f64 = (0..m).filter(|&j| tradable[j]).map(|j| upper[j]).sum();
            if !(lo <= 1.0 && hi >= 1.0) {
                return Err(Error::InvalidParameter("budget constraint is infeasible under the bounds".into()));
            }
        }
        Ok(FeasibleSet {
            lower,
            upper,
            budget,
            tradable,
        })
    }

    /// The long-only simplex {α ≥ 0, Σα = 1}.
    pub fn simplex(m: usize) -> Self {
        Self::simplex_with_mask(vec![true; m]).expect("simplex is nonempty")
    }

    /// Long-only simplex with untradable assets pinned to zero.
    pub fn simplex_with_mask(tradable: Vec<bool>) -> Result<Self> {
        let m = tradable.len();
        if !tradable.iter().any(|&t| t) {
            return Err(Error::InvalidParameter("at least one asset must be tradable".into()));
        }
        Self::new(vec![0.0; m], vec![1.0; m], true, tradable)
    }

    /// No constraints at all on α.
    pub fn unconstrained(m: usize) -> Self {
        Self::new(vec![f64::NEG_INFINITY; m], vec![f64::INFINITY; m], false, vec![true; m])
            .expect("free set is nonempty")
    }

    pub fn m(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn budget(&self) -> bool {
        self.budget
    }

    pub fn tradable(&self) -> &[bool] {
        &self.tradable
    }

    /// Largest constraint violation of `alpha` (0 when feasible).
    pub fn violation(&self, alpha: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for j in 0..self.m() {
            if self.tradable[j] {
                v = v.max(self.lower[j] - alpha[j]).max(alpha[j] - self.upper[j]);
            } else {
                v = v.max(alpha[j].abs());
            }
        }
        if self.budget {
            v = v.max((alpha.iter().sum::<f64>() - 1.0).abs());
        }
        v
    }
}

/// Symmetric quadratic form defining {y : yᵀQy + 2qᵀy + q₀ ≤ 0}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub q_matrix: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub q0: f64,
}

impl Ellipsoid {
    /// Requires Q ≻ 0 (compactness) and a Slater point with a strictly
    /// negative quadratic value (non-empty interior).
    pub fn new(q_matrix: Vec<Vec<f64>>, q: Vec<f64>, q0: f64, slater_point: &[f64]) -> Result<Self> {
        let e = Ellipsoid { q_matrix, q, q0 };
        e.validate()?;
        if slater_point.len() != e.q.len() {
            return Err(Error::Dimension("slater point has the wrong dimension".into()));
        }
        if !(e.eval(slater_point) < 0.0) {
            return Err(Error::InvalidParameter("slater point is not interior to the ellipsoid".into()));
        }
        Ok(e)
    }

    /// Euclidean ball ‖y − c‖² ≤ r².
    pub fn ball(center: &[f64], radius: f64) -> Result<Self> {
        let m = center.len();
        let mut q_matrix = vec![vec![0.0; m]; m];
        for (j, row) in q_matrix.iter_mut().enumerate() {
            row[j] = 1.0;
        }
        let q: Vec<f64> = center.iter().map(|c| -c).collect();
        let q0 = center.iter().map(|c| c * c).sum::<f64>() - radius * radius;
        Self::new(q_matrix, q, q0, center)
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.q.len();
        if self.q_matrix.len() != m || self.q_matrix.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ellipsoid Q must be m x m".into()));
        }
        for i in 0..m {
            for j in 0..m {
                if (self.q_matrix[i][j] - self.q_matrix[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidParameter("ellipsoid Q must be symmetric".into()));
                }
            }
        }
        let qm = nalgebra::DMatrix::from_fn(m, m, |i, j| self.q_matrix[i][j]);
        if nalgebra::Cholesky::new(qm).is_none() {
            return Err(Error::InvalidParameter("ellipsoid Q must be positive definite".into()));
        }
        if !(self.canonical().2 > 0.0) {
            return Err(Error::InvalidParameter("ellipsoid has an empty interior".into()));
        }
        Ok(())
    }

    /// yᵀQy + 2qᵀy + q₀.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let m = self.dim();
        let mut v = self.q0;
        for i in 0..m {
            v += 2.0 * self.q[i] * y[i];
            for j in 0..m {
                v += y[i] * self.q_matrix[i][j] * y[j];
            }
        }
        v
    }

    /// Center −Q⁻¹q, shape Q⁻¹ and squared radius qᵀQ⁻¹q − q₀, so that the
    /// set equals {y : (y − c)ᵀQ(y − c) ≤ r²}.
    pub fn canonical(&self) -> (Vec<f64>, nalgebra::DMatrix<f64>, f64) {
        let m = self.dim();
        let qm = nalgebra::DMatrix::from_fn(m, m, |i, j| self.q_matrix[i][j]);
        let chol = nalgebra::Cholesky::new(qm).expect("validated positive definite");
        let qv = nalgebra::DVector::from_column_slice(&self.q);
        let qinv_q = chol.solve(&qv);
        let center: Vec<f64> = qinv_q.iter().map(|v| -v).collect();
        let r2 = qv.dot(&qinv_q) - self.q0;
        (center, chol.inverse(), r2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportSpec {
    #[default]
    WholeSpace,
    Ellipsoid(Ellipsoid),
}

/// Result of an allocation solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub objective: f64,
    /// True when the program relaxes the support to ℝᵐ, in which case the
    /// objective is an upper bound on the risk-measure problem.
    pub conservative: bool,
}
