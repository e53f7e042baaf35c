mod common;

use lfe_core::bounds::{BoundsCertificate, Omega};
use lfe_core::homotopy::HomotopySystem;
use lfe_core::relativity::{momentum_to_velocity, State};
use lfe_core::shooting::{
    continue_lambda, monodromy_fd, newton_shooting, periodicity_residual, ContinuationSettings, OrbitSolution,
    ShootingProblem, IDENTITY_TOLERANCE,
};
use lfe_core::{Error, Matrix6};
use nalgebra::{Matrix3, Vector3};

fn assert_identities(orbit: &OrbitSolution) {
    let id = &orbit.identities;
    assert!(id.mean_residual() < IDENTITY_TOLERANCE, "mean identity {:e}", id.mean_residual());
    assert!(id.virial_residual() < IDENTITY_TOLERANCE, "virial identity {:e}", id.virial_residual());
    let equilibrium = orbit.trajectory.nodes().all(|(_, s)| (s.to_vector() - orbit.x0.to_vector()).amax() < 1e-9);
    if equilibrium {
        assert!(id.virial_lhs.abs() < IDENTITY_TOLERANCE);
    } else {
        assert!(id.virial_lhs < 0.0, "virial integral {:e}", id.virial_lhs);
    }
}

#[test]
fn desk_family_reaches_lambda_one() {
    let cert = BoundsCertificate::compute(&common::desk()).unwrap();
    let sys = HomotopySystem::new(common::desk());
    let problem = ShootingProblem::new(&sys, 0.0).with_domain(cert.omega());
    let start = newton_shooting(&problem, &problem.equilibrium_guess().unwrap()).unwrap();
    let path = continue_lambda(&problem, start, 1.0, &ContinuationSettings::default()).unwrap();
    assert!(path.is_complete(), "{:?}", path.status);
    assert_eq!(path.reached_lambda(), 1.0);
    assert!(path.entries.windows(2).all(|w| w[1].lambda > w[0].lambda));
    for orbit in &path.entries {
        assert!(orbit.residual_norm < 1e-9);
        assert_identities(orbit);
        // re-evaluated residual stays within twice the tolerance
        let again = periodicity_residual(&problem.at_lambda(orbit.lambda), &orbit.x0).unwrap();
        assert!(again.amax() < 2e-9);
    }
    let last = path.final_orbit().unwrap();
    assert!(last.trajectory.nodes().any(|(_, s)| s.p.norm() > 1e-6), "λ = 1 orbit is not an equilibrium");
}

#[test]
fn newton_converges_from_perturbed_equilibrium() {
    let sys = HomotopySystem::new(common::desk());
    let problem = ShootingProblem::new(&sys, 0.0);
    let x = problem.equilibrium_guess().unwrap();
    let guess = State::new(x.q + Vector3::new(1e-3, -1e-3, 1e-3), Vector3::zeros());
    let orbit = newton_shooting(&problem, &guess).unwrap();
    assert!(orbit.iterations <= 5, "{} iterations", orbit.iterations);
    assert!((orbit.x0.to_vector() - x.to_vector()).amax() < 1e-9);
    assert_identities(&orbit);
}

#[test]
fn guess_below_half_lower_bound_leaves_domain() {
    let cert = BoundsCertificate::compute(&common::desk()).unwrap();
    let sys = HomotopySystem::new(common::desk());
    let problem = ShootingProblem::new(&sys, 0.0).with_domain(cert.omega());
    let guess = State::new(Vector3::new(0.0, 0.0, 0.25 * cert.m), Vector3::zeros());
    assert!(matches!(newton_shooting(&problem, &guess), Err(Error::LeftDomain(_))));
}

#[test]
fn free_particle_residual_is_the_drift() {
    let sys = HomotopySystem::new(common::free());
    let problem = ShootingProblem::new(&sys, 1.0);
    let x0 = State::new(Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.3, -0.4, 1.2));
    let r = periodicity_residual(&problem, &x0).unwrap();
    let drift = sys.period() * momentum_to_velocity(&x0.p);
    assert!((r.fixed_rows::<3>(0) - drift).amax() < 1e-12);
    assert!(r.fixed_rows::<3>(3).amax() < 1e-12);
}

#[test]
fn coulomb_family_is_lambda_independent() {
    let sys = HomotopySystem::new(common::coulomb());
    let problem = ShootingProblem::new(&sys, 0.0);
    let start = newton_shooting(&problem, &problem.equilibrium_guess().unwrap()).unwrap();
    let at_one = periodicity_residual(&problem.at_lambda(1.0), &start.x0).unwrap();
    assert!(at_one.amax() < 1e-9);
    let x0 = start.x0;
    let path = continue_lambda(&problem, start, 1.0, &ContinuationSettings::default()).unwrap();
    assert!(path.is_complete());
    assert!(path.steps.iter().all(|s| s.accepted));
    for orbit in &path.entries {
        assert_eq!(orbit.x0, x0);
        assert_eq!(orbit.iterations, 0);
        assert_identities(orbit);
    }
}

#[test]
fn target_zero_is_the_input() {
    let sys = HomotopySystem::new(common::desk());
    let problem = ShootingProblem::new(&sys, 0.0);
    let start = newton_shooting(&problem, &problem.equilibrium_guess().unwrap()).unwrap();
    let x0 = start.x0;
    let path = continue_lambda(&problem, start, 0.0, &ContinuationSettings::default()).unwrap();
    assert!(path.is_complete());
    assert_eq!(path.entries.len(), 1);
    assert_eq!(path.entries[0].x0, x0);
}

#[test]
fn monodromy_matches_linearisation_at_equilibrium() {
    let sys = HomotopySystem::new(common::desk());
    let problem = ShootingProblem::new(&sys, 0.0);
    let x = problem.equilibrium_guess().unwrap();
    let end = problem.flow(&x).unwrap().final_vector();
    let m = monodromy_fd(&problem, &x, &end, 1e-7).unwrap();
    // linearised field in (q, p) order: q' = p (φ⁻¹ has unit derivative at p = 0), p' = c₀ ∂(q|q|⁻³)
    let f0 = sys.autonomous();
    let mut a = Matrix6::zeros();
    a.fixed_view_mut::<3, 3>(0, 3).copy_from(&Matrix3::identity());
    a.fixed_view_mut::<3, 3>(3, 0).copy_from(&f0.position_block(&x.q));
    let exact = (a * sys.period()).exp();
    let rel = (m - exact).amax() / exact.amax();
    assert!(rel < 1e-5, "relative error {rel:e}");
}

#[test]
fn monodromy_predicts_perturbed_residual() {
    let sys = HomotopySystem::new(common::desk());
    let problem = ShootingProblem::new(&sys, 0.6);
    let x = State::new(Vector3::new(0.05, -0.02, -0.8), Vector3::new(0.01, 0.02, -0.03));
    let base = periodicity_residual(&problem, &x).unwrap();
    let end = base + x.to_vector();
    let m = monodromy_fd(&problem, &x, &end, 1e-7).unwrap();
    let delta = 1e-5;
    for i in 0..6 {
        let mut xp = x.to_vector();
        xp[i] += delta;
        let r = periodicity_residual(&problem, &State::from_vector(&xp)).unwrap();
        let mut e = lfe_core::Vector6::zeros();
        e[i] = delta;
        let predicted = base + (m - Matrix6::identity()) * e;
        let gap = (r - predicted).amax();
        // O(δ²) with a modest constant
        assert!(gap < 1e3 * delta * delta, "direction {i}: {gap:e}");
    }
}

#[test]
fn continuation_stops_on_bound_violation() {
    let sys = HomotopySystem::new(common::desk());
    let tight = Omega { inner: 0.8, outer: 0.9, momentum: 10.0 };
    let loose = ShootingProblem::new(&sys, 0.0);
    let start = newton_shooting(&loose, &loose.equilibrium_guess().unwrap()).unwrap();
    let problem = loose.clone().with_domain(tight);
    let path = continue_lambda(&problem, start, 1.0, &ContinuationSettings::default()).unwrap();
    assert!(matches!(path.status, lfe_core::shooting::ContinuationStatus::BoundViolation { .. }));
}

#[test]
fn parallel_monodromy_is_deterministic() {
    let sys = HomotopySystem::new(common::desk());
    let problem = ShootingProblem::new(&sys, 0.4);
    let x = State::new(Vector3::new(0.0, 0.1, -0.8), Vector3::new(0.02, 0.0, 0.0));
    let end = problem.flow(&x).unwrap().final_vector();
    let a = monodromy_fd(&problem, &x, &end, 1e-7).unwrap();
    let b = monodromy_fd(&problem, &x, &end, 1e-7).unwrap();
    assert_eq!(a, b);
}
