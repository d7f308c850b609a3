use cylinder_bench::{coefficients, error_norm, time_norm, BenchError, BenchmarkSetup};
use proptest::prelude::*;

fn setup(nu: f64) -> BenchmarkSetup {
    BenchmarkSetup::schafer_turek(nu).unwrap()
}

#[test]
fn inflow_examples() {
    let s = setup(0.001);
    for y in [0.0, 0.1, 0.205, 0.3, 0.41] {
        assert_eq!(s.inflow_velocity(0.0, y).unwrap(), (0.0, 0.0));
    }
    let (u, v) = s.inflow_velocity(4.0, s.h / 2.0).unwrap();
    assert!((u - 1.5).abs() < 1e-15);
    assert_eq!(v, 0.0);
    for t in [1.0, 4.0, 6.5] {
        assert_eq!(s.inflow_velocity(t, 0.0).unwrap().0, 0.0);
        assert!(s.inflow_velocity(t, s.h).unwrap().0.abs() < 1e-15);
    }
}

#[test]
fn inflow_outside_inlet_is_a_domain_error() {
    let s = setup(0.1);
    assert!(matches!(s.inflow_velocity(4.0, -1e-9), Err(BenchError::Domain { .. })));
    assert!(matches!(s.inflow_velocity(4.0, 0.41 + 1e-9), Err(BenchError::Domain { .. })));
}

#[test]
fn mean_inflow_examples() {
    let s = setup(0.01);
    assert!((s.mean_inflow(4.0) - 1.0).abs() < 1e-15);
    assert_eq!(s.mean_inflow(0.0), 0.0);
}

/// Composite 5-point Gauss-Legendre rule on `[a, b]`.
fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let x = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    let w = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[test]
fn mean_inflow_matches_quadrature_of_the_profile() {
    let s = setup(0.001);
    for t in [0.3, 1.0, 2.5, 4.0, 5.7, 7.9] {
        let integral = gauss_legendre(|y| s.inflow_velocity(t, y).unwrap().0, 0.0, s.h, 8);
        assert!((integral / s.h - s.mean_inflow(t)).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn reynolds_examples() {
    assert!((setup(0.001).reynolds(4.0) - 100.0).abs() < 1e-12);
    assert!((setup(0.01).reynolds(4.0) - 10.0).abs() < 1e-12);
    assert!((setup(0.1).reynolds(4.0) - 1.0).abs() < 1e-12);
    assert_eq!(setup(0.1).reynolds(0.0), 0.0);
}

#[test]
fn coefficient_examples() {
    let s = setup(0.001);
    assert_eq!(coefficients(0.0, 0.0, &s), (0.0, 0.0));
    let (c_dr, _) = coefficients(0.1475, 0.0, &s);
    assert!((c_dr - 2.95).abs() < 1e-12);
    let (a, b) = coefficients(0.03, -0.01, &s);
    let (a2, b2) = coefficients(0.06, -0.02, &s);
    assert!((a2 - 2.0 * a).abs() < 1e-15 && (b2 - 2.0 * b).abs() < 1e-15);
}

#[test]
fn error_norm_examples() {
    let fi = [0.3, -1.2, 2.0, 0.7];
    assert_eq!(error_norm(&fi, &fi).unwrap(), 0.0);
    for n in [1, 4, 16] {
        assert!((error_norm(&vec![2.0; n], &vec![1.0; n]).unwrap() - 1.0).abs() < 1e-15);
    }
    let e = error_norm(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!((e - 1.0).abs() < 1e-15);
}

#[test]
fn error_norm_rejects_zero_reference_and_bad_lengths() {
    assert_eq!(error_norm(&[0.0; 3], &[0.0; 3]), Err(BenchError::UndefinedReference));
    assert_eq!(error_norm(&[1.0; 3], &[0.0; 3]), Err(BenchError::UndefinedReference));
    assert!(matches!(error_norm(&[1.0; 3], &[1.0; 4]), Err(BenchError::LengthMismatch { .. })));
    assert_eq!(error_norm(&[], &[]), Err(BenchError::Empty));
}

#[test]
fn time_norm_weights_by_slice_length() {
    // Four slices on [0, 8]: weight 2 per value.
    assert!((time_norm(&[1.0, 1.0, 1.0, 1.0], 8.0) - 8.0_f64.sqrt()).abs() < 1e-15);
    assert!((time_norm(&[3.0, 0.0, 0.0, 4.0], 8.0) - 50.0_f64.sqrt()).abs() < 1e-14);
}

fn series(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3_f64, n)
}

proptest! {
    #[test]
    fn inflow_is_symmetric(t in 0.0..8.0_f64, y in 0.0..0.41_f64) {
        let s = setup(0.01);
        let a = s.inflow_velocity(t, y).unwrap().0;
        let b = s.inflow_velocity(t, s.h - y).unwrap().0;
        prop_assert!((a - b).abs() <= 1e-14);
    }

    #[test]
    fn mean_is_two_thirds_of_the_peak(t in 0.0..8.0_f64) {
        let s = setup(0.01);
        prop_assert_eq!(s.mean_inflow(t), 2.0 / 3.0 * s.inflow_velocity(t, s.h / 2.0).unwrap().0);
    }

    #[test]
    fn reynolds_is_bounded_and_peaks_at_mid_period(t in 0.0..8.0_f64, k in 0usize..3) {
        let nu = [0.1, 0.01, 0.001][k];
        let s = setup(nu);
        let r = s.reynolds(t);
        let bound = s.d / nu;
        prop_assert!(r >= -1e-12 && r <= bound * (1.0 + 1e-12));
        prop_assert!(r <= s.reynolds(4.0) * (1.0 + 1e-12));
        prop_assert!((r - (std::f64::consts::PI * t / 8.0).sin() * s.d / nu).abs() <= 1e-12 * bound);
    }

    #[test]
    fn error_norm_is_scale_invariant(
        (a, b) in (1usize..20).prop_flat_map(|n| (series(n), series(n))),
        alpha in prop_oneof![-1e6..-1e-6_f64, 1e-6..1e6_f64],
    ) {
        prop_assume!(b.iter().any(|x| *x != 0.0));
        let e = error_norm(&a, &b).unwrap();
        let sa: Vec<f64> = a.iter().map(|x| alpha * x).collect();
        let sb: Vec<f64> = b.iter().map(|x| alpha * x).collect();
        let es = error_norm(&sa, &sb).unwrap();
        prop_assert!((e - es).abs() <= 1e-13 * e.max(1e-300), "{} vs {}", e, es);
    }

    #[test]
    fn error_norm_is_positive_unless_equal(
        (a, b) in (1usize..20).prop_flat_map(|n| (series(n), series(n))),
    ) {
        prop_assume!(b.iter().any(|x| *x != 0.0));
        let e = error_norm(&a, &b).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert_eq!(e == 0.0, a == b);
        prop_assert_eq!(error_norm(&b, &b).unwrap(), 0.0);
    }
}
