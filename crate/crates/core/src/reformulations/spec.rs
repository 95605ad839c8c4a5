use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GroundCostConfig;
use crate::types::{AmbiguitySpec, FeasibleSet, FiberSpec, LossSpec, SampleSet, SupportSpec};

/// Everything needed to pose one conditional allocation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemSpecRepr", into = "ProblemSpecRepr")]
pub struct ProblemSpec {
    pub data: SampleSet,
    pub fiber: FiberSpec,
    pub ambiguity: AmbiguitySpec,
    pub loss: LossSpec,
    pub support: SupportSpec,
    pub feasible: FeasibleSet,
    pub cost: GroundCostConfig,
}

/// JSON form. `feasible` defaults to the long-only simplex.
#[derive(Serialize, Deserialize)]
struct ProblemSpecRepr {
    data: SampleSet,
    fiber: FiberSpec,
    ambiguity: AmbiguitySpec,
    loss: LossSpec,
    #[serde(default)]
    support: SupportSpec,
    #[serde(default)]
    feasible: Option<FeasibleSet>,
    #[serde(default)]
    cost: GroundCostConfig,
}

impl TryFrom<ProblemSpecRepr> for ProblemSpec {
    type Error = Error;
    fn try_from(r: ProblemSpecRepr) -> Result<Self> {
        let m = r.data.m();
        let spec = ProblemSpec {
            data: r.data,
            fiber: r.fiber,
            ambiguity: r.ambiguity,
            loss: r.loss,
            support: r.support,
            feasible: r.feasible.unwrap_or_else(|| FeasibleSet::simplex(m)),
            cost: r.cost,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ProblemSpec> for ProblemSpecRepr {
    fn from(s: ProblemSpec) -> Self {
        ProblemSpecRepr {
            data: s.data,
            fiber: s.fiber,
            ambiguity: s.ambiguity,
            loss: s.loss,
            support: s.support,
            feasible: Some(s.feasible),
            cost: s.cost,
        }
    }
}

impl ProblemSpec {
    /// Whole-space support, long-only simplex and squared Euclidean cost.
    pub fn new(data: SampleSet, fiber: FiberSpec, ambiguity: AmbiguitySpec, loss: LossSpec) -> Result<Self> {
        let m = data.m();
        let spec = ProblemSpec {
            data,
            fiber,
            ambiguity,
            loss,
            support: SupportSpec::WholeSpace,
            feasible: FeasibleSet::simplex(m),
            cost: GroundCostConfig::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_support(mut self, support: SupportSpec) -> Result<Self> {
        self.support = support;
        self.validate()?;
        Ok(self)
    }

    pub fn with_feasible(mut self, feasible: FeasibleSet) -> Result<Self> {
        self.feasible = feasible;
        self.validate()?;
        Ok(self)
    }

    pub fn with_cost(mut self, cost: GroundCostConfig) -> Result<Self> {
        self.cost = cost;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.ambiguity.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.ambiguity.eps = eps;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.fiber.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.data.len()
    }

    pub fn m(&self) -> usize {
        self.data.m()
    }

    pub fn validate(&self) -> Result<()> {
        self.fiber.validate()?;
        self.ambiguity.validate()?;
        self.loss.validate()?;
        self.cost.x_cost.validate()?;
        if self.fiber.x0.len() != self.data.n() {
            return Err(Error::Dimension(format!(
                "x0 has {} entries, covariates have {}",
                self.fiber.x0.len(),
                self.data.n()
            )));
        }
        if self.feasible.m() != self.data.m() {
            return Err(Error::Dimension(format!(
                "feasible set has {} assets, returns have {}",
                self.feasible.m(),
                self.data.m()
            )));
        }
        if let SupportSpec::Ellipsoid(e) = &self.support {
            e.validate()?;
            if e.dim() != self.data.m() {
                return Err(Error::Dimension(format!(
                    "ellipsoid has dimension {}, returns have {}",
                    e.dim(),
                    self.data.m()
                )));
            }
        }
        Ok(())
    }
}
