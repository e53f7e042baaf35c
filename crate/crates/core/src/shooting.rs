//! Periodic orbits by single shooting and continuation in λ.
//!
//! A T-periodic solution at fixed λ is a zero of `G(x₀) = Φ_T(x₀) − x₀`,
//! where `Φ_T` is the time-T flow of the homotopy system. `G` is solved by
//! damped Newton with a finite-difference monodromy matrix; families are
//! followed from the equilibrium at λ = 0 toward λ = 1.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{first_violation, Omega};
use crate::degree::find_zero_f0;
use crate::homotopy::HomotopySystem;
use crate::integrator::{integrate, IntegratorConfig, Trajectory};
use crate::relativity::{momentum_to_velocity, State};
use crate::{Error, Matrix6, Result, Vector6};

/// Tolerance for the integral identities of a computed orbit.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonSettings {
    /// Converged when `‖G(x₀)‖∞` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step halvings allowed per iteration.
    pub max_halvings: usize,
    /// Forward-difference step for the monodromy matrix.
    pub fd_step: f64,
    /// Largest admissible condition number of `M − I`.
    pub max_condition: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tolerance: 1e-9, max_iterations: 50, max_halvings: 20, fd_step: 1e-7, max_condition: 1e12 }
    }
}

/// Periodic boundary value problem at a fixed λ.
#[derive(Debug, Clone)]
pub struct ShootingProblem<'a> {
    pub system: &'a HomotopySystem,
    pub lambda: f64,
    pub integrator: IntegratorConfig,
    pub newton: NewtonSettings,
    /// Admissible set for the iterates; without it only `|q| > r_min` is
    /// enforced.
    pub domain: Option<Omega>,
}

impl<'a> ShootingProblem<'a> {
    pub fn new(system: &'a HomotopySystem, lambda: f64) -> Self {
        Self {
            system,
            lambda,
            integrator: IntegratorConfig::default(),
            newton: NewtonSettings::default(),
            domain: None,
        }
    }

    /// Uses `omega` as admissible set and `r_min = m/2` for the guard.
    pub fn with_domain(mut self, omega: Omega) -> Self {
        self.integrator.r_min = 0.5 * omega.inner;
        self.domain = Some(omega);
        self
    }

    pub fn at_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    /// The zero of the averaged field, which is a constant solution at λ = 0.
    pub fn equilibrium_guess(&self) -> Result<State> {
        let f0 = self.system.autonomous();
        find_zero_f0(f0.c0, &f0.h_bar)
    }

    fn admissible(&self, x: &State) -> Result<()> {
        match &self.domain {
            Some(omega) => match omega.violation(x) {
                None => Ok(()),
                Some(why) => Err(Error::LeftDomain(why)),
            },
            None if x.q.norm() > self.integrator.r_min && x.p.iter().all(|c| c.is_finite()) => Ok(()),
            None => Err(Error::LeftDomain(format!(
                "|q| = {:.6e} <= r_min = {:.6e}",
                x.q.norm(),
                self.integrator.r_min
            ))),
        }
    }

    pub fn flow(&self, x0: &State) -> Result<Trajectory> {
        integrate(self.system, x0, (0.0, self.system.period()), self.lambda, &self.integrator)
    }
}

/// `Φ_T(x₀) − x₀`.
pub fn periodicity_residual(problem: &ShootingProblem<'_>, x0: &State) -> Result<Vector6> {
    Ok(problem.flow(x0)?.final_vector() - x0.to_vector())
}

/// Forward-difference monodromy `∂Φ_T/∂x₀` given the base end point.
/// The six perturbed integrations run in parallel; the result is assembled
/// column by column, so it does not depend on scheduling.
pub fn monodromy_fd(problem: &ShootingProblem<'_>, x0: &State, base_end: &Vector6, step: f64) -> Result<Matrix6> {
    let x = x0.to_vector();
    let columns: Vec<Result<Vector6>> = (0..6)
        .into_par_iter()
        .map(|j| {
            let delta = step * x[j].abs().max(1.0);
            let mut xp = x;
            xp[j] += delta;
            let end = problem.flow(&State::from_vector(&xp))?.final_vector();
            Ok((end - base_end) / delta)
        })
        .collect();
    let mut m = Matrix6::zeros();
    for (j, col) in columns.into_iter().enumerate() {
        m.set_column(j, &col?);
    }
    Ok(m)
}

/// Integral identities along a closed orbit.
///
/// `mean_integral = ∫₀ᵀ p′ dt` vanishes for a periodic orbit. With
/// `virial_lhs = ∫ q·p′ dt` and `virial_rhs = −∫ v·p dt`, periodicity gives
/// `virial_lhs = virial_rhs ≤ 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityCheck {
    pub mean_integral: [f64; 3],
    pub virial_lhs: f64,
    pub virial_rhs: f64,
}

impl IdentityCheck {
    pub fn mean_residual(&self) -> f64 {
        self.mean_integral.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn virial_residual(&self) -> f64 {
        (self.virial_lhs - self.virial_rhs).abs()
    }

    pub fn passes(&self) -> bool {
        self.mean_residual() < IDENTITY_TOLERANCE
            && self.virial_residual() < IDENTITY_TOLERANCE
            && self.virial_lhs <= IDENTITY_TOLERANCE
    }
}

pub fn identity_check(system: &HomotopySystem, traj: &Trajectory) -> IdentityCheck {
    let lambda = traj.lambda;
    let v = traj.integrate::<5, _>(
        |t, x| {
            let f = system.rhs_vector(t, x, lambda);
            let q = x.fixed_rows::<3>(0);
            let p = x.fixed_rows::<3>(3).into_owned();
            let dp = f.fixed_rows::<3>(3);
            let vel = momentum_to_velocity(&p);
            nalgebra::SVector::<f64, 5>::new(dp[0], dp[1], dp[2], q.dot(&dp), -vel.dot(&p))
        },
        1e-12,
    );
    IdentityCheck { mean_integral: [v[0], v[1], v[2]], virial_lhs: v[3], virial_rhs: v[4] }
}

#[derive(Debug, Clone)]
pub struct OrbitSolution {
    pub lambda: f64,
    pub x0: State,
    pub trajectory: Trajectory,
    pub residual: Vector6,
    pub residual_norm: f64,
    /// Monodromy at the last Newton iterate.
    pub monodromy: Matrix6,
    pub iterations: usize,
    pub identities: IdentityCheck,
}

impl fmt::Display for OrbitSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "periodic orbit at lambda = {}", self.lambda)?;
        writeln!(f, "  q0 = [{:.12e}, {:.12e}, {:.12e}]", self.x0.q[0], self.x0.q[1], self.x0.q[2])?;
        writeln!(f, "  p0 = [{:.12e}, {:.12e}, {:.12e}]", self.x0.p[0], self.x0.p[1], self.x0.p[2])?;
        writeln!(f, "  |Phi_T(x0) - x0|_inf = {:.3e} after {} Newton iterations", self.residual_norm, self.iterations)?;
        writeln!(f, "  integral of p' = {:.3e} (sup norm)", self.identities.mean_residual())?;
        writeln!(
            f,
            "  virial: int q.p' = {:.6e}, -int v.p = {:.6e}",
            self.identities.virial_lhs, self.identities.virial_rhs
        )
    }
}

fn inf_norm(v: &Vector6) -> f64 {
    v.amax()
}

fn condition_number(j: &Matrix6) -> f64 {
    let sv = j.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Damped Newton on `Φ_T(x₀) − x₀` from `guess`.
///
/// Fails with [`Error::LeftDomain`] when the guess is not admissible or no
/// damped step stays admissible, [`Error::SingularJacobian`] when
/// `cond(M − I) > max_condition`, and [`Error::NewtonDiverged`] when the
/// iteration budget runs out or no step reduces the residual.
pub fn newton_shooting(problem: &ShootingProblem<'_>, guess: &State) -> Result<OrbitSolution> {
    problem.admissible(guess)?;
    let settings = &problem.newton;
    let mut x = *guess;
    let mut traj = problem.flow(&x)?;
    let mut residual = traj.final_vector() - x.to_vector();
    let mut norm = inf_norm(&residual);
    let mut monodromy = Matrix6::identity();
    let mut iterations = 0;

    while norm >= settings.tolerance {
        if iterations == settings.max_iterations {
            return Err(Error::NewtonDiverged(format!(
                "no convergence in {} iterations, residual {norm:.3e}",
                settings.max_iterations
            )));
        }
        monodromy = monodromy_fd(problem, &x, &traj.final_vector(), settings.fd_step)?;
        let jac = monodromy - Matrix6::identity();
        let condition = condition_number(&jac);
        if !(condition <= settings.max_condition) {
            return Err(Error::SingularJacobian { condition });
        }
        let step = jac
            .lu()
            .solve(&(-residual))
            .ok_or(Error::SingularJacobian { condition: f64::INFINITY })?;

        let mut alpha = 1.0;
        let mut last_failure = None;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let trial = State::from_vector(&(x.to_vector() + alpha * step));
            let outcome = problem.admissible(&trial).and_then(|_| problem.flow(&trial));
            match outcome {
                Ok(t) => {
                    let r = t.final_vector() - trial.to_vector();
                    let n = inf_norm(&r);
                    if n < norm {
                        accepted = Some((trial, t, r, n));
                        break;
                    }
                    last_failure = None;
                }
                Err(e) => last_failure = Some(e),
            }
            alpha *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((xn, tn, rn, nn)) => {
                x = xn;
                traj = tn;
                residual = rn;
                norm = nn;
            }
            None => {
                return Err(match last_failure {
                    Some(e @ Error::LeftDomain(_)) => e,
                    Some(e) => Error::NewtonDiverged(format!("every damped step failed, last: {e}")),
                    None => Error::NewtonDiverged(format!(
                        "no damped step reduces the residual {norm:.3e}"
                    )),
                });
            }
        }
    }

    if iterations == 0 {
        monodromy = monodromy_fd(problem, &x, &traj.final_vector(), settings.fd_step)?;
    }
    let identities = identity_check(problem.system, &traj);
    Ok(OrbitSolution {
        lambda: problem.lambda,
        x0: x,
        trajectory: traj,
        residual,
        residual_norm: norm,
        monodromy,
        iterations,
        identities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuationSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub growth: f64,
    /// Consecutive successes before the step grows.
    pub successes_before_growth: usize,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        Self { initial_step: 0.1, min_step: 1e-4, growth: 1.5, successes_before_growth: 2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub lambda_from: f64,
    pub step: f64,
    pub accepted: bool,
    pub newton_iterations: Option<usize>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ContinuationStatus {
    Completed,
    /// The step fell below the floor; the path is valid up to `reached`.
    StepsizeUnderflow { reached: f64, cause: String },
    /// An orbit on the path left the admissible set.
    BoundViolation { lambda: f64, detail: String },
}

#[derive(Debug, Clone)]
pub struct ContinuationPath {
    pub entries: Vec<OrbitSolution>,
    pub steps: Vec<StepRecord>,
    pub status: ContinuationStatus,
}

impl ContinuationPath {
    pub fn is_complete(&self) -> bool {
        self.status == ContinuationStatus::Completed
    }

    pub fn reached_lambda(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.lambda)
    }

    pub fn final_orbit(&self) -> Option<&OrbitSolution> {
        self.entries.last()
    }

    /// CSV with columns `lambda,x0_norm,residual,newton_iterations`.
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "lambda,x0_norm,residual,newton_iterations")?;
        for e in &self.entries {
            writeln!(
                out,
                "{:e},{:e},{:e},{}",
                e.lambda,
                e.x0.to_vector().norm(),
                e.residual_norm,
                e.iterations
            )?;
        }
        Ok(())
    }
}

fn orbit_violation(omega: &Option<Omega>, orbit: &OrbitSolution) -> Option<String> {
    let omega = omega.as_ref()?;
    first_violation(omega, orbit.trajectory.nodes().map(|(_, s)| s))
}

/// Follows the orbit `start` from its λ to `target`.
///
/// The predictor is the previous initial condition. A failed corrector
/// halves Δλ; two consecutive successes grow it by `growth`. The path stops
/// with [`ContinuationStatus::StepsizeUnderflow`] when Δλ drops below the
/// floor and with [`ContinuationStatus::BoundViolation`] when an orbit
/// leaves the problem's domain.
pub fn continue_lambda(
    problem: &ShootingProblem<'_>,
    start: OrbitSolution,
    target: f64,
    settings: &ContinuationSettings,
) -> Result<ContinuationPath> {
    if !(0.0..=1.0).contains(&target) || target < start.lambda {
        return Err(Error::InvalidArgument(format!(
            "target lambda {target} must lie in [{}, 1]",
            start.lambda
        )));
    }
    if !(settings.min_step > 0.0 && settings.initial_step >= settings.min_step && settings.growth >= 1.0) {
        return Err(Error::InvalidArgument(format!("continuation settings {settings:?}")));
    }
    let mut steps = Vec::new();
    if let Some(detail) = orbit_violation(&problem.domain, &start) {
        let lambda = start.lambda;
        return Ok(ContinuationPath {
            entries: vec![start],
            steps,
            status: ContinuationStatus::BoundViolation { lambda, detail },
        });
    }
    let mut entries = vec![start];
    let mut dl = settings.initial_step;
    let mut streak = 0;

    loop {
        let current = entries.last().expect("path is never empty");
        let from = current.lambda;
        if from >= target {
            return Ok(ContinuationPath { entries, steps, status: ContinuationStatus::Completed });
        }
        let step = dl.min(target - from);
        let next = if target - from <= step { target } else { from + step };
        let guess = current.x0;
        match newton_shooting(&problem.at_lambda(next), &guess) {
            Ok(orbit) => {
                steps.push(StepRecord {
                    lambda_from: from,
                    step,
                    accepted: true,
                    newton_iterations: Some(orbit.iterations),
                    failure: None,
                });
                if let Some(detail) = orbit_violation(&problem.domain, &orbit) {
                    return Ok(ContinuationPath {
                        entries,
                        steps,
                        status: ContinuationStatus::BoundViolation { lambda: next, detail },
                    });
                }
                entries.push(orbit);
                streak += 1;
                if streak >= settings.successes_before_growth {
                    dl *= settings.growth;
                    streak = 0;
                }
            }
            Err(e) => {
                log::debug!("continuation step {from} -> {next} failed: {e}");
                steps.push(StepRecord {
                    lambda_from: from,
                    step,
                    accepted: false,
                    newton_iterations: None,
                    failure: Some(e.to_string()),
                });
                streak = 0;
                dl *= 0.5;
                if dl < settings.min_step {
                    return Ok(ContinuationPath {
                        entries,
                        steps,
                        status: ContinuationStatus::StepsizeUnderflow { reached: from, cause: e.to_string() },
                    });
                }
            }
        }
    }
}
