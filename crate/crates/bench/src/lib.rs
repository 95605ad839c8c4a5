//! Shared fixtures for the solver benchmarks.

use condport_core::{AmbiguitySpec, FiberSpec, LossSpec, ProblemSpec, Sample, SampleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random instance with scalar covariates and ρ a fixed margin above ρ_min.
pub fn instance(n_samples: usize, m: usize, gamma: f64, eps: f64, loss: LossSpec, seed: u64) -> ProblemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = SampleSet::new(
        (0..n_samples)
            .map(|_| Sample {
                x: vec![rng.random_range(-1.0..1.0)],
                y: (0..m).map(|_| rng.random_range(-0.05..0.05)).collect(),
            })
            .collect(),
    )
    .unwrap();
    let fiber = FiberSpec::new(vec![0.0], gamma).unwrap();
    let geo = condport_core::compute_geometry(&data, &fiber, &Default::default()).unwrap();
    let rho = condport_core::rho_min(&geo.kappa, eps).unwrap() + 0.05;
    ProblemSpec::new(data, fiber, AmbiguitySpec::new(rho, eps).unwrap(), loss).unwrap()
}

pub fn kappa(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0.0..4.0)).collect()
}
