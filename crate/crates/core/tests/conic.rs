mod common;

use common::{random_loss, random_simplex, random_spec};
use condport_core::conic::{
    solve_conic, solve_optimal, validate_program, AffineExpr, ConeBlock, ProgramBuilder, SolveStatus,
};
use condport_core::{build_program, Backend, ConicProgram, Decision, DualCertificate, LossVariant, SolveOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn solve(p: &ConicProgram) -> f64 {
    let s = solve_conic(p, &SolveOptions::default()).unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    s.objective
}

#[test]
fn textbook_programs() {
    let mut b = ProgramBuilder::new();
    let x = b.var("x");
    b.nonneg("x>=1", vec![AffineExpr::var(x).add_const(-1.0)]);
    b.minimize(AffineExpr::var(x));
    assert!((solve(&b.build()) - 1.0).abs() < 1e-7);

    let mut b = ProgramBuilder::new();
    let t = b.var("t");
    b.soc("norm", AffineExpr::var(t), vec![AffineExpr::constant(3.0), AffineExpr::constant(4.0)]);
    b.minimize(AffineExpr::var(t));
    assert!((solve(&b.build()) - 5.0).abs() < 1e-7);

    let mut b = ProgramBuilder::new();
    let t = b.var("t");
    let one = AffineExpr::constant(1.0);
    b.psd("lmi", vec![vec![AffineExpr::var(t), one.clone()], vec![one, AffineExpr::var(t)]]);
    b.minimize(AffineExpr::var(t));
    assert!((solve(&b.build()) - 1.0).abs() < 1e-7);
}

#[test]
fn statuses_are_reported() {
    let mut b = ProgramBuilder::new();
    let x = b.var("x");
    b.minimize(AffineExpr::var(x));
    b.nonneg("x<=0", vec![AffineExpr::term(x, -1.0)]);
    let p = b.build();
    assert_eq!(solve_conic(&p, &SolveOptions::default()).unwrap().status, SolveStatus::Unbounded);

    let mut b = ProgramBuilder::new();
    let x = b.var("x");
    b.nonneg("x>=1", vec![AffineExpr::var(x).add_const(-1.0)]);
    b.nonneg("x<=0", vec![AffineExpr::term(x, -1.0)]);
    b.minimize(AffineExpr::var(x));
    let p = b.build();
    assert_eq!(solve_conic(&p, &SolveOptions::default()).unwrap().status, SolveStatus::Infeasible);
    assert_eq!(solve_optimal(&p, &SolveOptions::default()).unwrap_err().code(), "SOLVER_STATUS");
}

#[test]
fn diagnostics() {
    let mut b = ProgramBuilder::new();
    let t = b.var("t");
    b.soc("ok", AffineExpr::var(t), vec![AffineExpr::constant(1.0)]);
    b.minimize(AffineExpr::var(t));
    let good = b.build();
    assert!(validate_program(&good).is_ok());

    let mut bad = good.clone();
    bad.cones.push(ConeBlock::Nonnegative {
        name: "stray".into(),
        rows: vec![AffineExpr::var(condport_core::conic::Var(7))],
    });
    let errs = validate_program(&bad).unwrap_err();
    assert!(errs.iter().any(|e| e.contains("stray")), "{errs:?}");
    assert!(solve_conic(&bad, &SolveOptions::default()).is_err());

    let mut asym = good.clone();
    asym.cones.push(ConeBlock::PositiveSemidefinite {
        name: "lopsided".into(),
        order: 2,
        entries: vec![
            AffineExpr::var(condport_core::conic::Var(0)),
            AffineExpr::constant(1.0),
            AffineExpr::constant(0.0),
            AffineExpr::var(condport_core::conic::Var(0)),
        ],
    });
    let errs = validate_program(&asym).unwrap_err();
    assert!(errs.iter().any(|e| e.contains("lopsided")), "{errs:?}");
}

#[test]
fn vertex_backend_matches_interior_point_on_lp() {
    let mut b = ProgramBuilder::new();
    let x = b.nonneg_vars("x", 3);
    b.eq("budget", vec![AffineExpr::constant(-1.0).add_term(x[0], 1.0).add_term(x[1], 1.0).add_term(x[2], 1.0)]);
    b.minimize(AffineExpr::zero().add_term(x[0], 3.0).add_term(x[1], 1.0).add_term(x[2], 2.0));
    let p = b.build();
    let a = solve_optimal(&p, &SolveOptions { backend: Some(Backend::Clarabel), ..Default::default() }).unwrap();
    let v = solve_optimal(&p, &SolveOptions { backend: Some(Backend::Vertex), ..Default::default() }).unwrap();
    assert!((a.objective - 1.0).abs() < 1e-7);
    assert!((v.objective - 1.0).abs() < 1e-12);
}

fn random_program(seed: u64, gamma: f64, variant: LossVariant, fixed: bool) -> ConicProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loss = random_loss(&mut rng, variant);
    let n = rng.random_range(2..=4);
    let eps = rng.random_range(0.2..=1.0);
    let spec = random_spec(&mut rng, n, 2, gamma, eps, 0.1, loss);
    let d = if fixed {
        Decision::Fixed { alpha: random_simplex(&mut rng, 2), beta: rng.random_range(-0.1..0.1) }
    } else {
        Decision::Variable
    };
    build_program(&spec, &d).unwrap().program
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn json_round_trip(seed in any::<u64>(), fiber in any::<bool>(), cvar in any::<bool>(), fixed in any::<bool>()) {
        let v = if cvar { LossVariant::MeanCvar } else { LossVariant::MeanVariance };
        let p = random_program(seed, if fiber { 0.1 } else { 0.0 }, v, fixed);
        let back = ConicProgram::from_json(&p.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn optimal_primal_is_feasible(seed in any::<u64>(), fiber in any::<bool>(), cvar in any::<bool>(), fixed in any::<bool>()) {
        let v = if cvar { LossVariant::MeanCvar } else { LossVariant::MeanVariance };
        let p = random_program(seed, if fiber { 0.1 } else { 0.0 }, v, fixed);
        let opts = SolveOptions::default();
        let s = solve_optimal(&p, &opts).unwrap();
        prop_assert!(p.max_violation(&s.primal) <= 10.0 * opts.tol, "violation {}", p.max_violation(&s.primal));
        prop_assert!((p.objective_value(&s.primal) - s.objective).abs() <= 1e-9 * (1.0 + s.objective.abs()));
    }

    #[test]
    fn fiber_certificates_lie_in_dual_set(seed in any::<u64>(), cvar in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = if cvar { LossVariant::MeanCvar } else { LossVariant::MeanVariance };
        let loss = random_loss(&mut rng, v);
        let (gamma, eps) = (rng.random_range(0.05..0.5), rng.random_range(0.2..0.8));
        let spec = random_spec(&mut rng, 4, 2, gamma, eps, 0.1, loss);
        let opts = SolveOptions::default();
        let (_, cert) = condport_core::worst_case_value(&[0.4, 0.6], 0.01, &spec, &opts).unwrap();
        let is_fiber = matches!(cert, DualCertificate::Fiber { .. });
        prop_assert!(is_fiber);
        prop_assert!(cert.violation() <= 10.0 * opts.tol, "violation {}", cert.violation());
    }
}
