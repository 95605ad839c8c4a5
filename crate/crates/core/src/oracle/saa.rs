use crate::error::{Error, Result};
use crate::geometry::{GroundCostConfig, XCost};
use crate::loss::eval_loss;
use crate::types::{FiberSpec, LossSpec, SampleSet};

/// Average loss over the samples whose covariate lies in the fiber, under
/// the squared Euclidean covariate cost.
pub fn saa_conditional_loss(
    alpha: &[f64],
    beta: f64,
    data: &SampleSet,
    fiber: &FiberSpec,
    loss: &LossSpec,
) -> Result<f64> {
    saa_conditional_loss_with_cost(alpha, beta, data, fiber, loss, &GroundCostConfig::default())
}

pub fn saa_conditional_loss_with_cost(
    alpha: &[f64],
    beta: f64,
    data: &SampleSet,
    fiber: &FiberSpec,
    loss: &LossSpec,
    cfg: &GroundCostConfig,
) -> Result<f64> {
    fiber.validate()?;
    if fiber.x0.len() != data.n() {
        return Err(Error::Dimension("x0 and covariates differ in dimension".into()));
    }
    let cost: &XCost = &cfg.x_cost;
    let mut total = 0.0;
    let mut count = 0usize;
    for s in data.iter() {
        if cost.cost(&s.x, &fiber.x0) <= fiber.gamma {
            total += eval_loss(&s.y, alpha, beta, loss)?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyFiber);
    }
    Ok(total / count as f64)
}
