use lfe_core::bounds::Omega;
use lfe_core::degree::{brouwer_degree, find_zero_f0};
use lfe_core::homotopy::AutonomousField;
use lfe_core::Error;
use nalgebra::Vector3;
use proptest::prelude::*;

#[test]
fn unit_forcing_example() {
    let h = Vector3::new(0.0, 0.0, 2.0);
    let omega = Omega { inner: 1e-20, outer: 2.0, momentum: 1e10 };
    let report = brouwer_degree(1.0, &h, &omega).unwrap();
    let q = report.x0.q;
    assert!((q - Vector3::new(0.0, 0.0, -(2f64).powf(-0.5))).norm() < 1e-15);
    assert_eq!(report.x0.p, Vector3::zeros());
    let residual = AutonomousField { c0: 1.0, h_bar: h }.value(&report.x0).unwrap().amax();
    assert!(residual < 1e-12);
    assert!(report.det_analytic < 0.0 && report.det_numeric < 0.0);
    assert!((report.det_numeric - report.det_analytic).abs() < 1e-5 * report.det_analytic.abs());
    assert_eq!(report.degree, -1);
    assert_eq!(report.sweep.starts, 1000);
    assert!(report.sweep.converged > 0);
    assert!(report.sweep.max_distance < 1e-8);
    assert!(report.sweep.max_zero_momentum < 1e-12);
}

#[test]
fn substitution_oracle() {
    let x = find_zero_f0(4.0, &Vector3::new(1.0, 0.0, 0.0)).unwrap();
    assert!((x.q - Vector3::new(-2.0, 0.0, 0.0)).norm() < 1e-15);
    // 4·(−2,0,0)/8 = −h̄
    assert!((4.0 * x.q / x.q.norm().powi(3) + Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
}

#[test]
fn zero_outside_annulus() {
    let omega = Omega { inner: 0.8, outer: 2.0, momentum: 10.0 };
    let err = brouwer_degree(1.0, &Vector3::new(0.0, 0.0, 2.0), &omega).unwrap_err();
    assert!(matches!(err, Error::ZeroOutsideOmega { .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_negative_at_every_zero(
        c0 in 1e-2f64..1e2,
        h in prop::array::uniform3(-10.0f64..10.0),
    ) {
        let h = Vector3::from(h);
        prop_assume!(h.norm() > 1e-3);
        let x = find_zero_f0(c0, &h).unwrap();
        let f0 = AutonomousField { c0, h_bar: h };
        let j = f0.f0_and_jacobian(&x).unwrap();
        prop_assert!(j.det_closed_form < 0.0);
        prop_assert!(j.det_direct < 0.0);
        let oracle = -2.0 * c0.powi(3) * x.q.norm().powi(-9);
        prop_assert!((j.det_closed_form - oracle).abs() <= 1e-12 * oracle.abs());
    }
}
