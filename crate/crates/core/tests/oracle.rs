mod common;

use common::*;
use condport_core::oracle::{saa_conditional_loss, worst_case_bruteforce, GridSpec};
use condport_core::{
    worst_case_value, AmbiguitySpec, FiberSpec, LossSpec, LossVariant, ProblemSpec, Sample, SampleSet, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn one_dim(xy: &[(f64, f64)]) -> SampleSet {
    SampleSet::new(xy.iter().map(|&(x, y)| Sample { x: vec![x], y: vec![y] }).collect()).unwrap()
}

#[test]
fn saa_examples() {
    let mv = LossSpec::mean_variance(0.0).unwrap();
    let fiber = FiberSpec::new(vec![0.0], 0.25).unwrap();
    // (y − β)² at β = 0 gives losses 1 and 3 on the two in-fiber samples.
    let data = one_dim(&[(0.1, 1.0), (-0.2, 3f64.sqrt()), (2.0, 100.0)]);
    assert!((saa_conditional_loss(&[1.0], 0.0, &data, &fiber, &mv).unwrap() - 2.0).abs() < 1e-12);

    let inside = one_dim(&[(0.0, 0.5), (0.1, -0.3)]);
    let wide = FiberSpec::new(vec![0.0], 1.0).unwrap();
    let plain = (0.25 + 0.09) / 2.0;
    assert!((saa_conditional_loss(&[1.0], 0.0, &inside, &wide, &mv).unwrap() - plain).abs() < 1e-15);

    let far = one_dim(&[(5.0, 0.5)]);
    assert_eq!(saa_conditional_loss(&[1.0], 0.0, &far, &fiber, &mv).unwrap_err().code(), "EMPTY_FIBER");
}

/// N = 1, ε = 1 on a single point at x₀: the adversary moves y by ≤ √ρ
/// along α, so the value is (|ŷ − β| + √ρ)² for the pure variance loss.
#[test]
fn pinned_single_sample() {
    let data = one_dim(&[(0.0, 0.2)]);
    let spec = ProblemSpec::new(
        data,
        FiberSpec::new(vec![0.0], 0.0).unwrap(),
        AmbiguitySpec::new(0.25, 1.0).unwrap(),
        LossSpec::mean_variance(0.0).unwrap(),
    )
    .unwrap();
    let grid = GridSpec::uniform(1, -1.0, 1.0, 201).unwrap();
    let (v, wc) = worst_case_bruteforce(&[1.0], 0.0, &spec, &grid).unwrap();
    assert!((v - 0.49).abs() < 1e-12, "{v}");
    wc.verify(&[1.0], 0.0, &spec, 1e-9).unwrap();
    let exact = worst_case_value(&[1.0], 0.0, &spec, &SolveOptions::default()).unwrap().0;
    assert!((exact - 0.49).abs() < 1e-6);
}

#[test]
fn refinement_and_small_eps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for variant in [LossVariant::MeanVariance, LossVariant::MeanCvar] {
        let loss = random_loss(&mut rng, variant);
        let spec = random_spec(&mut rng, 3, 1, 0.05, 0.6, 0.05, loss.clone());
        let beta = rng.random_range(-0.1..0.1);
        let coarse = GridSpec::uniform(1, -3.0, 3.0, 31).unwrap();
        let fine = GridSpec::uniform(1, -3.0, 3.0, 61).unwrap();
        let (a, wa) = worst_case_bruteforce(&[1.0], beta, &spec, &coarse).unwrap();
        let (b, wb) = worst_case_bruteforce(&[1.0], beta, &spec, &fine).unwrap();
        assert!(b >= a - 1e-12, "{variant:?}: {a} then {b}");
        wa.verify(&[1.0], beta, &spec, 1e-9).unwrap();
        wb.verify(&[1.0], beta, &spec, 1e-9).unwrap();
        assert!(b <= worst_case_value(&[1.0], beta, &spec, &SolveOptions::default()).unwrap().0 + 1e-6);
    }

    // Tiny ε with generous budget: all fiber mass can sit on the worst atom.
    let loss = LossSpec::mean_variance(0.0).unwrap();
    let spec = random_spec(&mut rng, 2, 1, 0.05, 0.02, 50.0, loss.clone());
    let grid = GridSpec::uniform(1, -3.0, 3.0, 61).unwrap();
    let (v, _) = worst_case_bruteforce(&[1.0], 0.0, &spec, &grid).unwrap();
    assert!((v - 9.0).abs() < 1e-9, "{v}");
}

#[test]
fn oracle_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spec = random_spec(&mut rng, 3, 1, 0.05, 0.5, 0.05, LossSpec::mean_variance(0.1).unwrap());
    let grid2 = GridSpec::uniform(2, -1.0, 1.0, 5).unwrap();
    assert_eq!(worst_case_bruteforce(&[1.0], 0.0, &spec, &grid2).unwrap_err().code(), "DIMENSION_MISMATCH");
    let low = spec.clone().with_rho(1e-6).unwrap();
    let grid = GridSpec::uniform(1, -1.0, 1.0, 5).unwrap();
    if low.ambiguity.rho < condport_core::rho_min(&condport_core::compute_geometry(&low.data, &low.fiber, &low.cost).unwrap().kappa, 0.5).unwrap() {
        assert_eq!(worst_case_bruteforce(&[1.0], 0.0, &low, &grid).unwrap_err().code(), "REGIME_RHO_BELOW_MIN");
    }
    assert!(GridSpec::uniform(1, 1.0, -1.0, 5).is_err());
}
