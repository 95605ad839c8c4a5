//! Self-checks run by `condport validate`: each suite draws small random
//! instances and compares two independent computations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{eps_lower_lp, rho_min_lp, worst_case_bruteforce, GridSpec};
use crate::conic::SolveOptions;
use crate::error::Result;
use crate::feasibility::{eps_lower, rho_max, rho_min};
use crate::geometry::{compute_geometry, GroundCostConfig};
use crate::reformulations::{worst_case_value, ProblemSpec};
use crate::types::{AmbiguitySpec, FiberSpec, LossSpec, Sample, SampleSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteReport {
    fn new(name: &str, tolerance: f64) -> Self {
        SuiteReport {
            name: name.into(),
            cases: 0,
            failures: 0,
            max_error: 0.0,
            tolerance,
            passed: true,
        }
    }

    fn record(&mut self, err: f64) {
        self.cases += 1;
        self.max_error = self.max_error.max(err);
        if !(err <= self.tolerance) {
            self.failures += 1;
            self.passed = false;
        }
    }

    fn fail(&mut self) {
        self.cases += 1;
        self.failures += 1;
        self.passed = false;
    }
}

fn random_samples(rng: &mut ChaCha8Rng, n_samples: usize, n: usize, m: usize) -> Result<SampleSet> {
    let samples = (0..n_samples)
        .map(|_| Sample {
            x: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            y: (0..m).map(|_| rng.random_range(-0.5..0.5)).collect(),
        })
        .collect();
    SampleSet::new(samples)
}

/// Greedy knapsacks against vertex-enumerated LPs.
pub fn knapsack_suite(seeds: std::ops::Range<u64>) -> SuiteReport {
    let mut rep = SuiteReport::new("knapsack_vs_lp", 1e-8);
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=7);
        let kappa: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let eps = rng.random_range(0.05..1.0);
        match (rho_min(&kappa, eps), rho_min_lp(&kappa, eps)) {
            (Ok(a), Ok(b)) => rep.record((a - b).abs()),
            _ => rep.fail(),
        }
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let i1: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
        let rmax = rho_max(&d, &i1);
        if rmax > 0.0 {
            let rho = rng.random_range(0.0..rmax);
            match (eps_lower(&d, &i1, rho), eps_lower_lp(&d, &i1, rho)) {
                (Ok(a), Ok(b)) => rep.record((a - b).abs()),
                _ => rep.fail(),
            }
        }
    }
    rep
}

/// The conic worst case must dominate the brute-force adversary, whose
/// distribution must itself verify.
pub fn sandwich_suite(seeds: std::ops::Range<u64>) -> SuiteReport {
    let mut rep = SuiteReport::new("oracle_sandwich", 1e-5);
    let opts = SolveOptions::default();
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let outcome = (|| -> Result<f64> {
            let data = random_samples(&mut rng, 3, 1, 1)?;
            let fiber = FiberSpec::new(vec![0.0], 0.0)?;
            let geo = compute_geometry(&data, &fiber, &GroundCostConfig::default())?;
            let eps = rng.random_range(0.2..0.6);
            let rho = rho_min(&geo.kappa, eps)? + rng.random_range(0.05..0.5);
            let loss = if rng.random_bool(0.5) {
                LossSpec::mean_variance(rng.random_range(0.0..1.0))?
            } else {
                LossSpec::mean_cvar(rng.random_range(0.0..1.0), 0.2)?
            };
            let spec = ProblemSpec::new(data, fiber, AmbiguitySpec::new(rho, eps)?, loss)?;
            let alpha = [1.0];
            let beta = rng.random_range(-0.2..0.2);
            let (upper, _) = worst_case_value(&alpha, beta, &spec, &opts)?;
            let grid = GridSpec::uniform(1, -3.0, 3.0, 61)?;
            let (lower, dist) = worst_case_bruteforce(&alpha, beta, &spec, &grid)?;
            dist.verify(&alpha, beta, &spec, 1e-7)?;
            Ok((lower - upper).max(0.0) / (1.0 + upper.abs()))
        })();
        match outcome {
            Ok(e) => rep.record(e),
            Err(_) => rep.fail(),
        }
    }
    rep
}

/// Dual certificates from fixed-decision solves satisfy their constraints.
pub fn certificate_suite(seeds: std::ops::Range<u64>) -> SuiteReport {
    let mut rep = SuiteReport::new("dual_certificate", 1e-6);
    let opts = SolveOptions::default();
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let outcome = (|| -> Result<f64> {
            let data = random_samples(&mut rng, 4, 1, 2)?;
            let fiber = FiberSpec::new(vec![0.0], rng.random_range(0.05..0.5))?;
            let geo = compute_geometry(&data, &fiber, &GroundCostConfig::default())?;
            let eps = rng.random_range(0.2..0.6);
            let rho = rho_min(&geo.kappa, eps)? + rng.random_range(0.05..0.5);
            let loss = LossSpec::mean_cvar(0.5, 0.2)?;
            let spec = ProblemSpec::new(data, fiber, AmbiguitySpec::new(rho, eps)?, loss)?;
            let (_, cert) = worst_case_value(&[0.5, 0.5], 0.0, &spec, &opts)?;
            Ok(cert.violation())
        })();
        match outcome {
            Ok(e) => rep.record(e),
            Err(_) => rep.fail(),
        }
    }
    rep
}

/// All suites; `quick` trims the case counts.
pub fn run_validation(quick: bool) -> Vec<SuiteReport> {
    let k = if quick { 5 } else { 25 };
    vec![knapsack_suite(0..4 * k), sandwich_suite(0..k), certificate_suite(0..k)]
}
