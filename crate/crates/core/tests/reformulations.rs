mod common;

use common::*;
use condport_core::conic::{solve_optimal, ConeBlock};
use condport_core::oracle::saa_conditional_loss;
use condport_core::reformulations::{
    build_cvar_fiber, build_cvar_singleton, build_cvar_tslp, build_infty, build_mv_fiber, build_mv_singleton,
    infty_vstar, reduce_null_eps, route, uninformative_sup, NullEpsReduction, Polytope, RecourseSpec, Route,
};
use condport_core::{
    compute_geometry, eval_loss, rho_min, solve_allocation, worst_case_value, AmbiguitySpec, Decision, Ellipsoid,
    FeasibleSet, FiberSpec, LossSpec, LossVariant, ProblemSpec, Sample, SampleSet, SolveOptions, SupportSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn spec_from(xy: &[(f64, Vec<f64>)], gamma: f64, rho: f64, eps: f64, loss: LossSpec) -> ProblemSpec {
    let data = SampleSet::new(xy.iter().map(|(x, y)| Sample { x: vec![*x], y: y.clone() }).collect()).unwrap();
    ProblemSpec::new(data, FiberSpec::new(vec![0.0], gamma).unwrap(), AmbiguitySpec::new(rho, eps).unwrap(), loss)
        .unwrap()
}

fn free(spec: ProblemSpec) -> ProblemSpec {
    let m = spec.m();
    spec.with_feasible(FeasibleSet::unconstrained(m)).unwrap()
}

fn wc(alpha: &[f64], beta: f64, spec: &ProblemSpec) -> f64 {
    worst_case_value(alpha, beta, spec, &opts()).unwrap().0
}

// ------------------------------------------------------------------ shapes

#[test]
fn singleton_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, m) = (5, 3);
    let mv = free(random_spec(&mut rng, n, m, 0.0, 0.5, 0.1, LossSpec::mean_variance(0.3).unwrap()));
    let s = build_mv_singleton(&mv, &Decision::Variable).unwrap().program.count_rows();
    assert_eq!(s.soc_dims.len(), n + 1);
    assert_eq!(s.soc_dims.iter().filter(|&&d| d == m + 2).count(), 1);
    assert_eq!(s.soc_dims.iter().filter(|&&d| d == 3).count(), n);
    assert!(s.psd_orders.is_empty());

    let cv = free(random_spec(&mut rng, n, m, 0.0, 0.5, 0.1, LossSpec::mean_cvar(0.3, 0.1).unwrap()));
    let s = build_cvar_singleton(&cv, &Decision::Variable).unwrap().program.count_rows();
    assert_eq!(s.soc_dims, vec![m + 2; 2 * n]);
    assert_eq!(s.equality_rows, 2 * n);
}

#[test]
fn fiber_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (n, m) = (4, 3);
    let fixed = Decision::Fixed { alpha: vec![0.2, 0.3, 0.5], beta: 0.01 };
    let mv = free(random_spec(&mut rng, n, m, 0.2, 0.5, 0.1, LossSpec::mean_variance(0.3).unwrap()));
    let s = build_mv_fiber(&mv, &fixed).unwrap().program.count_rows();
    let count = |o: usize| s.psd_orders.iter().filter(|&&k| k == o).count();
    assert_eq!(count(m + 1), 2 * n);
    assert_eq!(count(2), 1);
    assert_eq!(count(m), n);
    assert_eq!(s.psd_orders.len(), 3 * n + 1);

    let cv = free(random_spec(&mut rng, n, m, 0.2, 0.5, 0.1, LossSpec::mean_cvar(0.3, 0.1).unwrap()));
    for d in [Decision::Variable, fixed] {
        let s = build_cvar_fiber(&cv, &d).unwrap().program.count_rows();
        assert_eq!(s.psd_orders, vec![m + 1; 2 * n]);
    }
}

#[test]
fn type_infty_shape_and_vstar() {
    let loss = LossSpec::mean_variance(0.0).unwrap();
    assert_eq!(infty_vstar(&[1.0, 0.0], 0.0, &[0.0, 0.0], 1.0, &loss), 1.0);

    let xy: Vec<(f64, Vec<f64>)> =
        [0.1, -0.3, 0.4, 2.5].iter().map(|&x| (x, vec![0.01 * x, -0.02 * x])).collect();
    let mut spec = free(spec_from(&xy, 0.05, 0.5, 0.5, LossSpec::mean_variance(0.2).unwrap()));
    spec.ambiguity = AmbiguitySpec::type_infinity(0.5).unwrap();
    assert_eq!(route(&spec).unwrap(), Route::TypeInfty);
    let f = build_infty(&spec, &Decision::Variable).unwrap();
    let s = f.program.count_rows();
    // 𝒥 drops the sample at 2.5; one extra cone bounds ‖α‖.
    let j = 3;
    assert_eq!(s.soc_dims.len(), j + 1);
    let epi = f.program.cone("epigraph").map(|c| c.exprs().len());
    assert_eq!(epi, Some(3 * j));
}

// -------------------------------------------------------- dual agreement

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn socp_matches_scalar_dual(seed in any::<u64>(), cvar in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let variant = if cvar { LossVariant::MeanCvar } else { LossVariant::MeanVariance };
        let loss = random_loss(&mut rng, variant);
        let (n, m) = (rng.random_range(1..=5), rng.random_range(1..=3));
        let (eps, margin) = (rng.random_range(0.2..=1.0), rng.random_range(0.02..0.5));
        let spec = random_spec(&mut rng, n, m, 0.0, eps, margin, loss);
        let alpha = random_simplex(&mut rng, m);
        let beta = rng.random_range(-0.2..0.2);
        let v = wc(&alpha, beta, &spec);
        let s = scalar_dual(&alpha, beta, &spec);
        prop_assert!((v - s).abs() <= 1e-5 * s.abs().max(1e-8), "SOCP {} vs scalar dual {}", v, s);
    }

    #[test]
    fn worst_case_monotone(seed in any::<u64>(), cvar in any::<bool>(), fiber in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let variant = if cvar { LossVariant::MeanCvar } else { LossVariant::MeanVariance };
        let loss = random_loss(&mut rng, variant);
        let spec = random_spec(&mut rng, 4, 2, if fiber { 0.1 } else { 0.0 }, 0.6, 0.05, loss);
        let (alpha, beta) = (random_simplex(&mut rng, 2), rng.random_range(-0.1..0.1));
        let rho = spec.ambiguity.rho;
        let tol = 1e-7;
        let a = wc(&alpha, beta, &spec);
        let b = wc(&alpha, beta, &spec.clone().with_rho(2.0 * rho).unwrap());
        prop_assert!(b >= a - tol * (1.0 + a.abs()));
        let c = wc(&alpha, beta, &spec.clone().with_eps(0.3).unwrap());
        prop_assert!(c >= a - tol * (1.0 + a.abs()));
    }
}

// ---------------------------------------------------------- singleton

#[test]
fn worst_case_dominates_nominal() {
    let y = vec![0.02, -0.01];
    let spec = spec_from(&[(0.0, y.clone())], 0.0, 0.5, 1.0, LossSpec::mean_variance(0.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let alpha = random_simplex(&mut rng, 2);
        let beta = rng.random_range(-0.1..0.1);
        assert!(wc(&alpha, beta, &spec) >= eval_loss(&y, &alpha, beta, &spec.loss).unwrap() - 1e-9);
    }
    assert!(solve_allocation(&spec, &opts()).unwrap().objective >= -1e-9);
}

#[test]
fn near_minimal_budget_recovers_saa() {
    let xy: Vec<(f64, Vec<f64>)> = vec![(0.0, vec![0.03]), (0.0, vec![-0.01]), (0.0, vec![0.02])];
    for loss in [LossSpec::mean_variance(0.4).unwrap(), LossSpec::mean_cvar(0.4, 0.5).unwrap()] {
        let spec = spec_from(&xy, 0.0, 1e-6, 1.0, loss.clone());
        let (alpha, beta) = ([1.0], 0.005);
        let saa = saa_conditional_loss(&alpha, beta, &spec.data, &spec.fiber, &loss).unwrap();
        let v = wc(&alpha, beta, &spec);
        assert!(v >= saa - 1e-7 && v - saa < 1e-2, "{v} vs {saa}");
    }
}

/// Duplicating both SOC families must leave the optimum unchanged.
#[test]
fn duplicated_cvar_family_is_redundant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let spec = random_spec(&mut rng, 3, 2, 0.0, 0.5, 0.1, LossSpec::mean_cvar(0.0, 0.999).unwrap());
    let f = build_cvar_singleton(&spec, &Decision::Variable).unwrap();
    let base = solve_optimal(&f.program, &opts()).unwrap().objective;
    let mut dup = f.program.clone();
    let extra: Vec<ConeBlock> = dup
        .cones
        .iter()
        .filter(|c| c.name().starts_with("cone_a") || c.name().starts_with("cone_b"))
        .map(|c| match c {
            ConeBlock::SecondOrder { name, rows } => ConeBlock::SecondOrder { name: format!("{name}_copy"), rows: rows.clone() },
            other => other.clone(),
        })
        .collect();
    assert_eq!(extra.len(), 6);
    dup.cones.extend(extra);
    let again = solve_optimal(&dup, &opts()).unwrap().objective;
    assert!((base - again).abs() < 1e-7, "{base} vs {again}");
}

#[test]
fn symmetric_instance_is_permutation_invariant() {
    let xy: Vec<(f64, Vec<f64>)> = [0.01, -0.02, 0.015, 0.0].iter().enumerate().map(|(i, &v)| (0.1 * i as f64, vec![v; 3])).collect();
    for loss in [LossSpec::mean_variance(0.5).unwrap(), LossSpec::mean_cvar(0.5, 0.2).unwrap()] {
        let geo_rho = {
            let s = spec_from(&xy, 0.0, 1.0, 0.5, loss.clone());
            rho_min(&compute_geometry(&s.data, &s.fiber, &s.cost).unwrap().kappa, 0.5).unwrap()
        };
        let spec = spec_from(&xy, 0.0, geo_rho + 0.05, 0.5, loss);
        let a = solve_allocation(&spec, &opts()).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
            let p: Vec<f64> = perm.iter().map(|&i| a.alpha[i]).collect();
            assert!((wc(&p, a.beta, &spec) - a.objective).abs() < 1e-6);
        }
    }
}

#[test]
fn dominated_asset_matches_simplex_grid() {
    let base = [0.01, -0.02, 0.03, 0.0, 0.015];
    let xy: Vec<(f64, Vec<f64>)> =
        base.iter().enumerate().map(|(i, &v)| (0.05 * i as f64, vec![v, v - 0.01])).collect();
    let loss = LossSpec::mean_variance(2.0).unwrap();
    let probe = spec_from(&xy, 0.0, 1.0, 0.4, loss.clone());
    let rmin = rho_min(&compute_geometry(&probe.data, &probe.fiber, &probe.cost).unwrap().kappa, 0.4).unwrap();
    let spec = spec_from(&xy, 0.0, rmin + 0.01, 0.4, loss);
    let best = solve_allocation(&spec, &opts()).unwrap();
    let grid = (0..=100)
        .map(|k| {
            let a = k as f64 / 100.0;
            let pinned = FeasibleSet::new(vec![a, 1.0 - a], vec![a, 1.0 - a], true, vec![true, true]).unwrap();
            solve_allocation(&spec.clone().with_feasible(pinned).unwrap(), &opts()).unwrap().objective
        })
        .fold(f64::INFINITY, f64::min);
    assert!(grid >= best.objective - 1e-7);
    assert!(grid - best.objective <= 1e-3, "grid {grid} vs solve {}", best.objective);
}

#[test]
fn regime_guards() {
    let xy: Vec<(f64, Vec<f64>)> = vec![(1.0, vec![0.01]), (2.0, vec![0.02])];
    let below = spec_from(&xy, 0.0, 0.5, 1.0, LossSpec::mean_variance(0.1).unwrap());
    assert_eq!(solve_allocation(&below, &opts()).unwrap_err().code(), "REGIME_RHO_BELOW_MIN");
    let at = spec_from(&xy, 0.0, 2.5, 1.0, LossSpec::mean_variance(0.1).unwrap());
    assert_eq!(route(&at).unwrap_err().code(), "REGIME_RHO_BELOW_MIN");
    let null = spec_from(&xy, 0.0, 0.5, 0.0, LossSpec::mean_variance(0.1).unwrap());
    assert_eq!(solve_allocation(&null, &opts()).unwrap_err().code(), "REGIME_UNINFORMATIVE");
    let wrong = spec_from(&xy, 0.5, 5.0, 0.5, LossSpec::mean_variance(0.1).unwrap());
    assert_eq!(build_mv_singleton(&wrong, &Decision::Variable).unwrap_err().code(), "REGIME_WRONG_BUILDER");
    let cv = spec_from(&xy, 0.0, 5.0, 0.5, LossSpec::mean_variance(0.1).unwrap());
    assert_eq!(build_cvar_singleton(&cv, &Decision::Variable).unwrap_err().code(), "REGIME_WRONG_BUILDER");
}

// -------------------------------------------------------------- fiber

#[test]
fn fiber_dominates_conditional_saa() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for variant in [LossVariant::MeanVariance, LossVariant::MeanCvar] {
        let xy: Vec<(f64, Vec<f64>)> = (0..4)
            .map(|i| (if i < 2 { 0.1 * i as f64 } else { 1.0 + i as f64 }, vec![rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05)]))
            .collect();
        let loss = random_loss(&mut rng, variant);
        // Half the samples sit in the fiber, so ε = 0.5 needs no transport.
        let spec = spec_from(&xy, 0.04, 0.05, 0.5, loss.clone());
        let (alpha, beta) = ([0.3, 0.7], 0.01);
        let saa = saa_conditional_loss(&alpha, beta, &spec.data, &spec.fiber, &loss).unwrap();
        assert!(wc(&alpha, beta, &spec) >= saa - 1e-7);
    }
}

#[test]
fn ellipsoid_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for variant in [LossVariant::MeanVariance, LossVariant::MeanCvar] {
        let loss = random_loss(&mut rng, variant);
        let spec = random_spec(&mut rng, 4, 2, 0.1, 0.5, 0.1, loss);
        let (alpha, beta) = ([0.5, 0.5], 0.0);
        let whole = wc(&alpha, beta, &spec);
        let huge = spec.clone().with_support(SupportSpec::Ellipsoid(Ellipsoid::ball(&[0.0, 0.0], 1e3).unwrap())).unwrap();
        let big = wc(&alpha, beta, &huge);
        assert!((whole - big).abs() <= 1e-4 * (1.0 + whole.abs()), "{variant:?}: {whole} vs {big}");
        let small = spec.clone().with_support(SupportSpec::Ellipsoid(Ellipsoid::ball(&[0.0, 0.0], 0.6).unwrap())).unwrap();
        assert!(wc(&alpha, beta, &small) <= whole + 1e-7);
        let a = solve_allocation(&small, &opts()).unwrap();
        assert!(!a.conservative);
        assert!(solve_allocation(&spec, &opts()).unwrap().conservative);
    }
}

// ------------------------------------------------------------ null ε

#[test]
fn null_eps_reduction_example() {
    let xy: Vec<(f64, Vec<f64>)> = vec![(0.0, vec![0.01]), (0.0, vec![0.02])];
    let spec = spec_from(&xy, 1.0, 0.25, 0.0, LossSpec::mean_variance(0.1).unwrap());
    match reduce_null_eps(&spec).unwrap() {
        NullEpsReduction::Reduced(s) => assert!((s.ambiguity.eps - 0.75).abs() < 1e-15),
        other => panic!("expected a reduction, got {other:?}"),
    }
    let edge = spec_from(&xy, 1.0, 1.0, 0.0, LossSpec::mean_variance(0.1).unwrap());
    assert_eq!(reduce_null_eps(&edge).unwrap_err().code(), "REGIME_BOUNDARY");
}

#[test]
fn uninformative_regime_values() {
    let xy: Vec<(f64, Vec<f64>)> = vec![(0.0, vec![0.01, 0.0]), (0.5, vec![0.02, 0.01])];
    let spec = spec_from(&xy, 0.1, 3.0, 0.0, LossSpec::mean_variance(0.3).unwrap());
    let NullEpsReduction::Uninformative(u) = reduce_null_eps(&spec).unwrap() else {
        panic!("expected the uninformative regime");
    };
    assert_eq!(u.value(&[0.5, 0.5], 0.0), f64::INFINITY);

    // Ellipse {(y₁/2)² + y₂² ≤ 1} shifted to (0.1, −0.2), against a polar grid.
    let e = Ellipsoid::new(vec![vec![0.25, 0.0], vec![0.0, 1.0]], vec![-0.025, 0.2], 0.0025 + 0.04 - 1.0, &[0.1, -0.2]).unwrap();
    let support = SupportSpec::Ellipsoid(e);
    for loss in [LossSpec::mean_variance(0.3).unwrap(), LossSpec::mean_cvar(0.3, 0.2).unwrap()] {
        let (alpha, beta) = ([0.7, 0.3], 0.05);
        let closed = uninformative_sup(&alpha, beta, &loss, &support);
        let mut grid = f64::NEG_INFINITY;
        for k in 0..100_000 {
            let th = std::f64::consts::TAU * k as f64 / 100_000.0;
            let y = [0.1 + 2.0 * th.cos(), -0.2 + th.sin()];
            grid = grid.max(eval_loss(&y, &alpha, beta, &loss).unwrap());
        }
        assert!(closed >= grid - 1e-12 && closed - grid < 1e-6, "{closed} vs {grid}");
        let mut s = spec.clone().with_support(support.clone()).unwrap();
        s.loss = loss.clone();
        let NullEpsReduction::Uninformative(u) = reduce_null_eps(&s).unwrap() else { panic!() };
        assert_eq!(u.value(&alpha, beta), closed);
    }
}

// -------------------------------------------------------------- TSLP

#[test]
fn box_support_function() {
    let b = Polytope::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let v = b.support_function(&[1.0, -2.0], &opts()).unwrap().unwrap();
    assert!((v - 3.0).abs() < 1e-7);
    let half = Polytope { g: vec![vec![1.0, 0.0], vec![0.0, 1.0]], h: vec![1.0, 1.0] };
    assert_eq!(half.validate(&opts()).unwrap_err().code(), "REGIME_UNBOUNDED_SUPPORT");
}

#[test]
fn tslp_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (n, m) = (3, 2);
    let spec = random_spec(&mut rng, n, m, 0.0, 0.5, 0.1, LossSpec::mean_cvar(0.2, 0.3).unwrap());
    let recourse = RecourseSpec {
        a_mat: vec![vec![0.0; m]; m],
        b_mat: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
        c_mat: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
        profit: vec![-0.6, -0.8],
        support: Polytope::boxed(&[-100.0; 2], &[100.0; 2]).unwrap(),
    };
    let s = build_cvar_tslp(&spec, &recourse).unwrap().program.count_rows();
    assert_eq!(s.soc_dims, vec![m + 2; 2 * n]);
    let bad = RecourseSpec { profit: vec![1.0], ..recourse };
    assert_eq!(build_cvar_tslp(&spec, &bad).unwrap_err().code(), "DIMENSION_MISMATCH");
}

#[test]
fn problem_spec_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = random_spec(&mut rng, 3, 2, 0.1, 0.5, 0.1, LossSpec::mean_cvar(0.2, 0.3).unwrap())
        .with_support(SupportSpec::Ellipsoid(Ellipsoid::ball(&[0.0, 0.0], 2.0).unwrap()))
        .unwrap();
    let text = serde_json::to_string(&spec).unwrap();
    let back: ProblemSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
}
