mod common;

use std::f64::consts::TAU;

use lfe_core::homotopy::HomotopySystem;
use lfe_core::integrator::{energy_drift, integrate, IntegratorConfig};
use lfe_core::relativity::{momentum_to_velocity, State};
use nalgebra::Vector3;

fn gyro_start() -> State {
    State::new(Vector3::new(3.0, 0.0, 0.0), Vector3::new(0.75, 0.0, 0.0))
}

#[test]
fn gyromotion_closes_after_one_gyration() {
    let sys = HomotopySystem::new(common::gyro());
    let x0 = gyro_start();
    // T_g = 2π√(1+|p|²)/b
    let tg = TAU * (1.0f64 + 0.75 * 0.75).sqrt();
    assert!((tg - TAU * 1.25).abs() < 1e-15);
    let tr = integrate(&sys, &x0, (0.0, tg), 1.0, &IntegratorConfig::default()).unwrap();
    let err = (tr.final_vector() - x0.to_vector()).amax();
    assert!(err < 1e-8, "state error {err:e}");
}

#[test]
fn gyromotion_follows_the_circle() {
    let sys = HomotopySystem::new(common::gyro());
    let x0 = gyro_start();
    let tg = TAU * 1.25;
    let tr = integrate(&sys, &x0, (0.0, tg), 1.0, &IntegratorConfig::default()).unwrap();
    // radius |p|/b = 0.75, centre q0 − 0.75 ŷ, angular rate b/γ = 0.8
    let centre = Vector3::new(3.0, -0.75, 0.0);
    for (t, s) in tr.sample(400) {
        let expected = centre + 0.75 * Vector3::new((0.8 * t).sin(), (0.8 * t).cos(), 0.0);
        assert!((s.q - expected).norm() < 1e-8, "t = {t}");
        assert!((s.p.norm() - 0.75).abs() < 1e-9);
        assert!(momentum_to_velocity(&s.p).norm() < 1.0);
    }
}

#[test]
fn observed_order_at_least_four_and_a_half() {
    let sys = HomotopySystem::new(common::gyro());
    let x0 = gyro_start();
    let tg = TAU * 1.25;
    let (mut log_steps, mut log_err) = (Vec::new(), Vec::new());
    for k in 6..=12 {
        let tol = 10f64.powi(-k);
        let cfg = IntegratorConfig { rtol: tol, atol: tol, ..Default::default() };
        let tr = integrate(&sys, &x0, (0.0, tg), 1.0, &cfg).unwrap();
        log_steps.push((tr.steps() as f64).ln());
        log_err.push((tr.final_vector() - x0.to_vector()).amax().ln());
    }
    let order = -common::slope(&log_steps, &log_err);
    assert!(order >= 4.5, "observed order {order}");
}

fn perturbed_equilibrium() -> (HomotopySystem, State) {
    let sys = HomotopySystem::new(common::desk());
    let q = Vector3::new(0.0, 0.0, -(0.5f64).sqrt());
    (sys, State::new(q + Vector3::new(1e-2, 0.0, 0.0), Vector3::new(0.0, 1e-2, 0.0)))
}

#[test]
fn energy_conserved_at_lambda_zero() {
    let (sys, x0) = perturbed_equilibrium();
    let tr = integrate(&sys, &x0, (0.0, 1.0), 0.0, &IntegratorConfig::default()).unwrap();
    let drift = energy_drift(&sys, &tr).unwrap();
    assert!(drift < 1e-8, "drift {drift:e}");
}

#[test]
fn energy_drift_shrinks_with_tolerance() {
    let (sys, x0) = perturbed_equilibrium();
    let drift = |rtol: f64| {
        let cfg = IntegratorConfig { rtol, atol: 1e-2 * rtol, ..Default::default() };
        energy_drift(&sys, &integrate(&sys, &x0, (0.0, 1.0), 0.0, &cfg).unwrap()).unwrap()
    };
    assert!(drift(1e-8) / drift(1e-10) > 1.0);
}

#[test]
fn energy_drift_requires_autonomous_forcing() {
    let (sys, x0) = perturbed_equilibrium();
    let tr = integrate(&sys, &x0, (0.0, 0.1), 0.5, &IntegratorConfig::default()).unwrap();
    assert!(energy_drift(&sys, &tr).is_err());
}

#[test]
fn equilibrium_stays_put() {
    let sys = HomotopySystem::new(common::desk());
    let x0 = State::new(Vector3::new(0.0, 0.0, -(0.5f64).sqrt()), Vector3::zeros());
    let tr = integrate(&sys, &x0, (0.0, 1.0), 0.0, &IntegratorConfig::default()).unwrap();
    for (_, s) in tr.nodes() {
        assert!((s.to_vector() - x0.to_vector()).amax() < 1e-10);
    }
    assert!(energy_drift(&sys, &tr).unwrap() < 1e-14);
}

#[test]
fn integration_is_deterministic() {
    let (sys, x0) = perturbed_equilibrium();
    let cfg = IntegratorConfig::default();
    let a = integrate(&sys, &x0, (0.0, 1.0), 0.7, &cfg).unwrap();
    let b = integrate(&sys, &x0, (0.0, 1.0), 0.7, &cfg).unwrap();
    let bits = |t: &lfe_core::integrator::Trajectory| {
        t.nodes()
            .flat_map(|(t, s)| {
                let x = s.to_vector();
                std::iter::once(t).chain(x.iter().copied().collect::<Vec<_>>())
            })
            .map(f64::to_bits)
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn free_particle_exact() {
    let sys = HomotopySystem::new(common::free());
    let x0 = State::new(Vector3::new(1.0, 2.0, -1.0), Vector3::new(3.0, -4.0, 12.0));
    let v = momentum_to_velocity(&x0.p);
    let tr = integrate(&sys, &x0, (0.0, 1.0), 1.0, &IntegratorConfig::default()).unwrap();
    for (t, s) in tr.sample(50) {
        assert!((s.q - (x0.q + t * v)).amax() < 1e-12);
        assert!((s.p - x0.p).amax() < 1e-12);
    }
}
