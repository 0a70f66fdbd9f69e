//! Cross-validation of the s-perimeter estimators against closed forms and
//! against each other.

use fracperim::geometry::ConvexBody;
use fracperim::math::{Matrix, Vector};
use fracperim::perimeter::{
    chord_mc, coupled_vs_ball, interval_ps_exact, ray_mc, slicewise_lower_bound,
    unit_ball_ps_analytic, McConfig, StrataConfig,
};

fn v2(x: f64, y: f64) -> Vector {
    Vector::new(&[x, y])
}

fn unit_ball2() -> ConvexBody {
    ConvexBody::ball(Vector::zeros(2), 1.0).unwrap()
}

fn square2() -> ConvexBody {
    ConvexBody::cuboid(Vector::zeros(2), v2(1.0, 1.0)).unwrap()
}

fn ellipse(a: f64) -> ConvexBody {
    ConvexBody::ellipsoid(Vector::zeros(2), v2(a, 1.0 / a), Matrix::identity(2)).unwrap()
}

/// |x - y| <= 3 * combined sigma, with a floor to avoid zero-sigma flukes.
fn within_3_sigma(a: f64, sa: f64, b: f64, sb: f64) {
    let sigma = (sa * sa + sb * sb).sqrt().max(1e-12 * a.abs().max(b.abs()));
    assert!(
        (a - b).abs() <= 3.0 * sigma,
        "difference {:.6} vs 3 sigma {:.6} (a={a}, b={b})",
        (a - b).abs(),
        3.0 * sigma
    );
}

#[test]
fn ray_mc_reproduces_interval_closed_form() {
    let interval = ConvexBody::interval(0.0, 1.0).unwrap();
    for s in [0.25, 0.5, 0.75] {
        let est = ray_mc(&interval, s, &McConfig::new(400_000, 41)).unwrap();
        let exact = interval_ps_exact(1.0, s).unwrap();
        within_3_sigma(est.value, est.std_error, exact, 0.0);
        assert!(est.std_error / exact < 0.01, "sigma too large: {}", est.std_error);
    }
}

#[test]
fn ray_mc_matches_ball_quadrature() {
    let ball = unit_ball2();
    for s in [0.25, 0.5, 0.75] {
        let est = ray_mc(&ball, s, &McConfig::new(400_000, 7)).unwrap();
        let exact = unit_ball_ps_analytic(2, s).unwrap();
        within_3_sigma(est.value, est.std_error, exact, 0.0);
    }
}

#[test]
fn ray_mc_ball_3d() {
    let ball = ConvexBody::ball(Vector::zeros(3), 1.0).unwrap();
    let est = ray_mc(&ball, 0.5, &McConfig::new(400_000, 3)).unwrap();
    let exact = unit_ball_ps_analytic(3, 0.5).unwrap();
    within_3_sigma(est.value, est.std_error, exact, 0.0);
}

#[test]
fn chord_mc_matches_ball_closed_form() {
    let ball = unit_ball2();
    for s in [0.25, 0.5, 0.75] {
        let est = chord_mc(&ball, s, &McConfig::new(400_000, 13)).unwrap();
        let exact = unit_ball_ps_analytic(2, s).unwrap();
        within_3_sigma(est.value, est.std_error, exact, 0.0);
        assert!(est.std_error / exact < 0.01);
    }
}

#[test]
fn chord_mc_interval_is_exact() {
    let interval = ConvexBody::interval(-0.5, 1.5).unwrap();
    let est = chord_mc(&interval, 0.25, &McConfig::new(1000, 0)).unwrap();
    let exact = interval_ps_exact(2.0, 0.25).unwrap();
    assert!((est.value - exact).abs() < 1e-12);
    assert_eq!(est.std_error, 0.0);
}

#[test]
fn cross_estimator_consistency() {
    for (name, body) in [
        ("ball", unit_ball2()),
        ("square", square2()),
        ("ellipse", ellipse(1.4)),
    ] {
        for s in [0.25, 0.5, 0.75] {
            let a = ray_mc(&body, s, &McConfig::new(300_000, 101)).unwrap();
            let b = chord_mc(&body, s, &McConfig::new(300_000, 202)).unwrap();
            let rel = (a.value - b.value).abs() / b.value;
            assert!(rel < 0.05, "{name} s={s}: gross disagreement {rel}");
            within_3_sigma(a.value, a.std_error, b.value, b.std_error);
        }
    }
}

#[test]
fn scale_invariance_of_ray_mc() {
    // P_s(lambda E) * lambda^{s-n} = P_s(E)
    let body = square2();
    let s = 0.5;
    for lam in [0.5, 2.0] {
        let a = ray_mc(&body, s, &McConfig::new(400_000, 131)).unwrap();
        let b = ray_mc(&body.scale(lam), s, &McConfig::new(400_000, 132)).unwrap();
        let b_rescaled = b.value * lam.powf(s - 2.0);
        within_3_sigma(a.value, a.std_error, b_rescaled, b.std_error * lam.powf(s - 2.0));
    }
}

#[test]
fn estimates_are_bit_deterministic() {
    let body = ellipse(1.3);
    let cfg = McConfig::new(50_000, 999);
    let a = ray_mc(&body, 0.5, &cfg).unwrap();
    let b = ray_mc(&body, 0.5, &cfg).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    let c = chord_mc(&body, 0.5, &cfg).unwrap();
    let d = chord_mc(&body, 0.5, &cfg).unwrap();
    assert_eq!(c.value.to_bits(), d.value.to_bits());
}

#[test]
fn coupled_estimator_matches_reference_deficit() {
    // frozen high-precision values for the ellipse family (a = 1+e, b = 1/(1+e)):
    // delta_s(e=0.3, s=0.5) = 2.13828085e-2 of P_s(B)
    let body = ellipse(1.3);
    let est = coupled_vs_ball(&body, 0.5, &McConfig::new(400_000, 55)).unwrap();
    let expected = 2.13828085e-2 * unit_ball_ps_analytic(2, 0.5).unwrap();
    assert!(
        (est.diff - expected).abs() <= 3.0 * est.std_error + 1e-4 * expected,
        "diff {} vs expected {expected} (sigma {})",
        est.diff,
        est.std_error
    );
    // the coupled route must resolve this deficit sharply
    assert!(est.std_error < 0.05 * expected);
}

#[test]
fn coupled_estimator_near_ball_resolution() {
    // e = 0.05: deficit 7.437434e-4 of P_s(B): far below independent-estimator reach
    let body = ellipse(1.05);
    let est = coupled_vs_ball(&body, 0.5, &McConfig::new(400_000, 56)).unwrap();
    let expected = 7.437434e-4 * unit_ball_ps_analytic(2, 0.5).unwrap();
    assert!(
        (est.diff - expected).abs() <= 3.0 * est.std_error + 1e-3 * expected,
        "diff {} vs {expected} (sigma {})",
        est.diff,
        est.std_error
    );
}

#[test]
fn coupled_on_ball_is_zero() {
    let ball = unit_ball2();
    let est = coupled_vs_ball(&ball, 0.5, &McConfig::new(100_000, 77)).unwrap();
    assert!(
        est.diff.abs() <= 3.0 * est.std_error + 1e-10,
        "ball vs itself: {} +- {}",
        est.diff,
        est.std_error
    );
}

#[test]
fn boundary_stratum_reduces_error_on_ball() {
    // enabling the boundary stratum never increases the reported error
    // (paired comparison over 20 seeds at fixed budget)
    let ball = unit_ball2();
    let s = 0.5;
    let mut wins = 0;
    let mut total_none = 0.0;
    let mut total_layer = 0.0;
    for seed in 0..20u64 {
        let plain = ray_mc(
            &ball,
            s,
            &McConfig::new(20_000, seed).with_strata(StrataConfig::None),
        )
        .unwrap();
        let layered = ray_mc(
            &ball,
            s,
            &McConfig::new(20_000, seed).with_strata(StrataConfig::default()),
        )
        .unwrap();
        if layered.std_error <= plain.std_error {
            wins += 1;
        }
        total_none += plain.std_error;
        total_layer += layered.std_error;
    }
    assert!(
        wins >= 19,
        "stratification increased reported error on {}/20 seeds",
        20 - wins
    );
    assert!(total_layer < 0.8 * total_none, "mean reduction too weak");
}

#[test]
fn explicit_boundary_layer_mode_works() {
    let ball = unit_ball2();
    let cfg = McConfig::new(80_000, 5).with_strata(StrataConfig::boundary_layer_default());
    let est = ray_mc(&ball, 0.5, &cfg).unwrap();
    let exact = unit_ball_ps_analytic(2, 0.5).unwrap();
    within_3_sigma(est.value, est.std_error, exact, 0.0);
}

#[test]
fn slicewise_lower_bound_holds() {
    // ball and square: bound <= P_s + 3 sigma
    let s = 0.5;
    let ball = unit_ball2();
    let bound = slicewise_lower_bound(&ball, s, 64, 10_000, 1).unwrap();
    let exact = unit_ball_ps_analytic(2, s).unwrap();
    assert!(bound <= exact, "ball: bound {bound} vs exact {exact}");
    assert!(bound > 0.1 * exact, "bound suspiciously small");

    let sq = square2();
    let est = ray_mc(&sq, s, &McConfig::new(200_000, 9)).unwrap();
    let bound = slicewise_lower_bound(&sq, s, 64, 10_000, 2).unwrap();
    assert!(
        bound <= est.value + 3.0 * est.std_error,
        "square: bound {bound} vs {} +- {}",
        est.value,
        est.std_error
    );

    // stress: thin cuboid
    let thin = ConvexBody::cuboid(Vector::zeros(2), v2(1.0, 0.01)).unwrap();
    let est = ray_mc(&thin, s, &McConfig::new(200_000, 10)).unwrap();
    let bound = slicewise_lower_bound(&thin, s, 64, 10_000, 3).unwrap();
    assert!(
        bound <= est.value + 3.0 * est.std_error,
        "thin: bound {bound} vs {} +- {}",
        est.value,
        est.std_error
    );
}

#[test]
fn parameter_errors() {
    let ball = unit_ball2();
    assert!(ray_mc(&ball, 0.0, &McConfig::new(1000, 0)).is_err());
    assert!(ray_mc(&ball, 1.0, &McConfig::new(1000, 0)).is_err());
    assert!(ray_mc(&ball, 0.5, &McConfig::new(0, 0)).is_err());
    assert!(chord_mc(&ball, -0.5, &McConfig::new(1000, 0)).is_err());
    assert!(slicewise_lower_bound(&ConvexBody::interval(0.0, 1.0).unwrap(), 0.5, 32, 100, 0).is_err());
}
