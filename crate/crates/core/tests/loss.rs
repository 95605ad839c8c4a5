use condport_core::loss::{cvar_loss_hinge, cvar_loss_max, mv_loss};
use condport_core::{eval_loss, LossSpec};
use proptest::prelude::*;

#[test]
fn worked_examples() {
    let mv = LossSpec::mean_variance(0.0).unwrap();
    assert_eq!(eval_loss(&[2.0], &[1.0], 1.0, &mv).unwrap(), 1.0);
    let c = LossSpec::mean_cvar(1.0, 0.5).unwrap();
    assert_eq!(eval_loss(&[1.0], &[1.0], 0.0, &c).unwrap(), -1.0);
    assert_eq!(cvar_loss_max(1.0, 0.0, 1.0, 0.5), -1.0);
    let c0 = LossSpec::mean_cvar(0.0, 0.5).unwrap();
    assert_eq!(eval_loss(&[-1.0], &[1.0], 0.0, &c0).unwrap(), 2.0);
}

#[test]
fn rejects_bad_parameters() {
    assert!(LossSpec::mean_cvar(0.1, 0.0).is_err());
    assert!(LossSpec::mean_cvar(0.1, 1.5).is_err());
    assert!(LossSpec::mean_variance(-1.0).is_err());
    let mv = LossSpec::mean_variance(0.1).unwrap();
    assert_eq!(eval_loss(&[1.0, 2.0], &[1.0], 0.0, &mv).unwrap_err().code(), "DIMENSION_MISMATCH");
}

proptest! {
    #[test]
    fn hinge_equals_max(z in -5.0..5.0f64, beta in -5.0..5.0f64, eta in 0.0..10.0f64, tau in 0.01..=1.0f64) {
        let (h, m) = (cvar_loss_hinge(z, beta, eta, tau), cvar_loss_max(z, beta, eta, tau));
        prop_assert!((h - m).abs() <= 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn variance_representation(zs in prop::collection::vec(-1.0..1.0f64, 2..40), h in -1.0..1.0f64) {
        let n = zs.len() as f64;
        let mean = zs.iter().sum::<f64>() / n;
        let var = zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n;
        let avg = |b: f64| zs.iter().map(|&z| mv_loss(z, b, 0.0)).sum::<f64>() / n;
        prop_assert!((avg(mean) - var).abs() <= 1e-14);
        prop_assert!(avg(mean + h) >= avg(mean) - 1e-15);
    }

    #[test]
    fn convex_in_beta(
        y in prop::collection::vec(-1.0..1.0f64, 3),
        a in prop::collection::vec(0.0..1.0f64, 3),
        b1 in -2.0..2.0f64,
        b2 in -2.0..2.0f64,
        eta in 0.0..3.0f64,
        tau in 0.05..=1.0f64,
        cvar in any::<bool>(),
    ) {
        let loss = if cvar { LossSpec::mean_cvar(eta, tau).unwrap() } else { LossSpec::mean_variance(eta).unwrap() };
        let f = |b: f64| eval_loss(&y, &a, b, &loss).unwrap();
        let mid = f(0.5 * (b1 + b2));
        prop_assert!(mid <= 0.5 * (f(b1) + f(b2)) + 1e-12);
    }
}
