//! Relativistic kinematics with the speed of light and the charge-to-mass
//! ratio normalized to one.
//!
//! The velocity `v` and the momentum `p = φ(v) = v / √(1 − |v|²)` are in
//! bijection; the solver works in `(q, p)` so that `|v| < 1` holds for every
//! finite momentum without any constraint handling.

use nalgebra::Vector3;
use serde::Serialize;

use crate::{Error, Result, Vector6};

/// Velocities at or beyond this speed are rejected when built from user input.
pub const MAX_INPUT_SPEED: f64 = 1.0 - 1e-12;

/// A strictly subluminal velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Velocity(Vector3<f64>);

impl Velocity {
    pub fn new(v: Vector3<f64>) -> Result<Self> {
        let speed = v.norm();
        if !(speed < MAX_INPUT_SPEED) {
            return Err(Error::Superluminal { speed });
        }
        Ok(Self(v))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn speed(&self) -> f64 {
        self.0.norm()
    }
}

/// Relativistic momentum. Every finite vector is admissible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Momentum(pub Vector3<f64>);

impl Momentum {
    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }
}

/// Phase point: position and relativistic momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub q: Vector3<f64>,
    pub p: Vector3<f64>,
}

impl State {
    pub fn new(q: Vector3<f64>, p: Vector3<f64>) -> Self {
        Self { q, p }
    }

    /// Packs as `(q1, q2, q3, p1, p2, p3)`.
    pub fn to_vector(&self) -> Vector6 {
        Vector6::new(self.q.x, self.q.y, self.q.z, self.p.x, self.p.y, self.p.z)
    }

    pub fn from_vector(x: &Vector6) -> Self {
        Self {
            q: x.fixed_rows::<3>(0).into_owned(),
            p: x.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn velocity(&self) -> Vector3<f64> {
        momentum_to_velocity(&self.p)
    }
}

/// `φ(v) = v / √(1 − |v|²)`.
pub fn phi(v: &Velocity) -> Momentum {
    let s = v.speed();
    // (1 - s)(1 + s) keeps relative accuracy as s -> 1
    let gamma_inv = ((1.0 - s) * (1.0 + s)).sqrt();
    Momentum(v.0 / gamma_inv)
}

/// `φ⁻¹(p) = p / √(1 + |p|²)`.
pub fn phi_inv(p: &Momentum) -> Velocity {
    Velocity(momentum_to_velocity(&p.0))
}

/// `√(1 + |p|²)`, the energy per unit rest mass.
pub fn lorentz_factor(p: &Momentum) -> f64 {
    gamma_of(&p.0)
}

#[inline]
pub(crate) fn gamma_of(p: &Vector3<f64>) -> f64 {
    (1.0 + p.norm_squared()).sqrt()
}

/// Raw form of [`phi_inv`] used in the vector field.
#[inline]
pub fn momentum_to_velocity(p: &Vector3<f64>) -> Vector3<f64> {
    p / gamma_of(p)
}
