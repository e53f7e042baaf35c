//! Brouwer degree of the averaged field `f₀(x) = (φ⁻¹(p), h̄ + c₀q|q|⁻³)`
//! on the numerical domain Ω.
//!
//! `f₀` has the single zero `x₀ = (q*, 0)` with `q* = −√c₀ h̄ |h̄|^(−3/2)`,
//! and the degree is the sign of the Jacobian determinant there.

use std::fmt;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::Omega;
use crate::homotopy::AutonomousField;
use crate::relativity::{phi, State, Velocity};
use crate::sampling::Halton;
use crate::{Error, Matrix6, Result, Vector6};

pub const DEFAULT_DEGREE_SEED: u64 = 0xDE6_2EE;

/// Zero of `f₀`, verified to residual `10⁻¹² max(1, |h̄|)`.
pub fn find_zero_f0(c0: f64, h_bar: &Vector3<f64>) -> Result<State> {
    if !(c0 > 0.0) {
        return Err(Error::InvalidArgument(format!("c0 = {c0} must be positive")));
    }
    let norm = h_bar.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::DegenerateForcing);
    }
    let q = -c0.sqrt() * norm.powf(-1.5) * h_bar;
    let x = State::new(q, Vector3::zeros());
    let residual = AutonomousField { c0, h_bar: *h_bar }.value(&x)?.amax();
    let tol = 1e-12 * norm.max(1.0);
    if residual < tol {
        Ok(x)
    } else {
        Err(Error::InvalidArgument(format!("zero of f0 has residual {residual:.3e} > {tol:.1e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeSettings {
    pub seed: u64,
    /// Newton starts of the uniqueness sweep.
    pub starts: usize,
    pub max_iterations: usize,
}

impl Default for DegreeSettings {
    fn default() -> Self {
        Self { seed: DEFAULT_DEGREE_SEED, starts: 1000, max_iterations: 300 }
    }
}

/// Outcome of Newton started from quasi-random points of Ω.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniquenessSweep {
    pub starts: usize,
    pub converged: usize,
    pub not_converged: usize,
    /// Largest distance between a converged zero and `x₀`.
    pub max_distance: f64,
    /// Largest `|p|` at a converged zero; zeros of `f₀` have `p = 0`.
    pub max_zero_momentum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    /// The zero `(q*, 0)`.
    pub x0: State,
    /// Closed form `−2c₀³|q|⁻⁹[…]`.
    pub det_analytic: f64,
    /// LU determinant of the analytic Jacobian.
    pub det_direct: f64,
    /// Determinant of the central-difference Jacobian.
    pub det_numeric: f64,
    /// `sign det` with rows `f₀ = (φ⁻¹(p), h̄ + c₀q|q|⁻³)` and columns
    /// `(p, q)`.
    pub degree: i32,
    /// Degree of `x = (q, p) ↦ (q′, p′) = f₀`, the same map written with
    /// matching row and column order; it differs from `degree` by the
    /// sign of the block swap, `(−1)³`.
    pub vector_field_degree: i32,
    pub sweep: UniquenessSweep,
    pub seed: u64,
}

impl fmt::Display for DegreeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = &self.x0.q;
        writeln!(f, "degree of f0 on Omega")?;
        writeln!(f, "  zero q* = [{:.15e}, {:.15e}, {:.15e}], p* = 0", q[0], q[1], q[2])?;
        writeln!(f, "  det (closed form)   = {:.15e}", self.det_analytic)?;
        writeln!(f, "  det (LU)            = {:.15e}", self.det_direct)?;
        writeln!(f, "  det (central diff.) = {:.15e}", self.det_numeric)?;
        writeln!(f, "  deg(f0, Omega, 0)   = {}", self.degree)?;
        writeln!(f, "  degree in (q, p) -> (q', p') orientation = {}", self.vector_field_degree)?;
        writeln!(
            f,
            "  uniqueness sweep: {} starts (seed {:#x}), {} converged to x0 (max distance {:.3e}, max |p| {:.3e}), {} not converged",
            self.sweep.starts,
            self.seed,
            self.sweep.converged,
            self.sweep.max_distance,
            self.sweep.max_zero_momentum,
            self.sweep.not_converged
        )
    }
}

/// Packs `(p, q)` in the Jacobian's column order.
fn to_pq(x: &State) -> Vector6 {
    Vector6::new(x.p[0], x.p[1], x.p[2], x.q[0], x.q[1], x.q[2])
}

fn from_pq(y: &Vector6) -> State {
    State::new(Vector3::new(y[3], y[4], y[5]), Vector3::new(y[0], y[1], y[2]))
}

fn numeric_jacobian(f0: &AutonomousField, x: &State) -> Result<Matrix6> {
    let y = to_pq(x);
    let mut jac = Matrix6::zeros();
    for j in 0..6 {
        let h = 1e-6 * y[j].abs().max(1.0);
        let mut plus = y;
        let mut minus = y;
        plus[j] += h;
        minus[j] -= h;
        let col = (f0.value(&from_pq(&plus))? - f0.value(&from_pq(&minus))?) / (2.0 * h);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

pub fn brouwer_degree(c0: f64, h_bar: &Vector3<f64>, omega: &Omega) -> Result<DegreeReport> {
    brouwer_degree_with(c0, h_bar, omega, &DegreeSettings::default())
}

/// Degree of `f₀` on `omega`, with three independent determinant
/// evaluations at the zero and a Newton sweep for further zeros.
pub fn brouwer_degree_with(
    c0: f64,
    h_bar: &Vector3<f64>,
    omega: &Omega,
    settings: &DegreeSettings,
) -> Result<DegreeReport> {
    let zero = find_zero_f0(c0, h_bar)?;
    let radius = zero.q.norm();
    if !(radius > omega.inner && radius < omega.outer) {
        return Err(Error::ZeroOutsideOmega { radius, inner: omega.inner, outer: omega.outer });
    }
    let f0 = AutonomousField { c0, h_bar: *h_bar };
    let jac = f0.f0_and_jacobian(&zero)?;
    let det_numeric = numeric_jacobian(&f0, &zero)?.determinant();
    let closed = jac.det_closed_form;
    let rel = |d: f64| (d - closed).abs() / closed.abs();
    if !(closed != 0.0 && rel(jac.det_direct) < 1e-8 && rel(det_numeric) < 1e-5) {
        return Err(Error::InconsistentDeterminants(format!(
            "closed form {closed:.6e}, LU {:.6e}, central differences {det_numeric:.6e}",
            jac.det_direct
        )));
    }
    let degree = if closed > 0.0 { 1 } else { -1 };
    let sweep = uniqueness_sweep(&f0, &zero, omega, settings)?;
    Ok(DegreeReport {
        x0: zero,
        det_analytic: closed,
        det_direct: jac.det_direct,
        det_numeric,
        degree,
        vector_field_degree: -degree,
        sweep,
        seed: settings.seed,
    })
}

enum NewtonEnd {
    Zero(State),
    Failed,
}

fn newton_f0(f0: &AutonomousField, start: State, max_iterations: usize) -> NewtonEnd {
    let tol = 1e-12 * f0.h_bar.norm().max(1.0);
    let mut x = start;
    let Ok(mut value) = f0.value(&x) else { return NewtonEnd::Failed };
    let mut norm = value.norm();
    for _ in 0..max_iterations {
        if value.amax() < tol {
            return NewtonEnd::Zero(polish(f0, x, norm));
        }
        let Ok(jac) = f0.f0_and_jacobian(&x) else { return NewtonEnd::Failed };
        let Some(step) = jac.jacobian.lu().solve(&(-value)) else { return NewtonEnd::Failed };
        let y = to_pq(&x);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = from_pq(&(y + alpha * step));
            if let Ok(v) = f0.value(&trial) {
                let n = v.norm();
                if n.is_finite() && n < norm * (1.0 - 1e-4 * alpha) {
                    x = trial;
                    value = v;
                    norm = n;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return if value.amax() < tol { NewtonEnd::Zero(x) } else { NewtonEnd::Failed };
        }
    }
    if value.amax() < tol {
        NewtonEnd::Zero(x)
    } else {
        NewtonEnd::Failed
    }
}

/// One more full Newton step once converged, kept if it helps.
fn polish(f0: &AutonomousField, x: State, norm: f64) -> State {
    let step = f0
        .f0_and_jacobian(&x)
        .ok()
        .and_then(|j| j.jacobian.lu().solve(&(-j.value)));
    match step.map(|s| from_pq(&(to_pq(&x) + s))) {
        Some(y) if f0.value(&y).is_ok_and(|v| v.norm() < norm) => y,
        _ => x,
    }
}

/// Starts fill Ω: `|q|³` uniform between `m³` and `(R+T)³`, velocities
/// uniform in the unit ball, `p = φ(v)` kept only if `|p| < L`.
fn sweep_start(point: &[f64], omega: &Omega) -> State {
    let (a, b) = (omega.inner.powi(3), omega.outer.powi(3));
    let r = (a + point[0] * (b - a)).cbrt();
    let dir_q = crate::sampling::sphere_point(point[1], point[2]);
    let dir_v = crate::sampling::sphere_point(point[3], point[4]);
    let speed = point[5].cbrt() * (1.0 - 1e-9);
    let mut p = Velocity::new(dir_v * speed).map_or_else(|_| Vector3::zeros(), |v| phi(&v).0);
    if p.norm() >= omega.momentum {
        p *= 0.5 * omega.momentum / p.norm();
    }
    State::new(dir_q * r, p)
}

fn uniqueness_sweep(f0: &AutonomousField, zero: &State, omega: &Omega, settings: &DegreeSettings) -> Result<UniquenessSweep> {
    let halton = Halton::new(6, settings.seed);
    let ends: Vec<NewtonEnd> = (0..settings.starts)
        .into_par_iter()
        .map(|i| newton_f0(f0, sweep_start(&halton.point(i), omega), settings.max_iterations))
        .collect();
    let scale = 1e-8 * (1.0 + zero.q.norm());
    let mut sweep = UniquenessSweep { starts: settings.starts, converged: 0, not_converged: 0, max_distance: 0.0, max_zero_momentum: 0.0 };
    for end in ends {
        match end {
            NewtonEnd::Zero(x) => {
                let d = (x.to_vector() - zero.to_vector()).norm();
                if d > scale && omega.contains(&x) {
                    return Err(Error::MultipleZeros { q: x.q });
                }
                sweep.converged += 1;
                sweep.max_distance = sweep.max_distance.max(d);
                sweep.max_zero_momentum = sweep.max_zero_momentum.max(x.p.norm());
            }
            NewtonEnd::Failed => sweep.not_converged += 1,
        }
    }
    Ok(sweep)
}
