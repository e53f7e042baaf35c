//! Periodic orbits of the relativistic Lorentz force equation
//!
//! ```text
//! (φ(q'))' = −∇V(q) + h(t) + q' × B(t, q),     φ(v) = v / √(1 − |v|²)
//! ```
//!
//! with electric potentials and magnetic fields that may be singular at the
//! origin (Coulomb-like potentials, magnetic dipoles). The crate provides
//!
//! - relativistic kinematics in momentum coordinates ([`relativity`]),
//! - field models and a sampled hypothesis validator ([`fields`]),
//! - the λ-homotopy connecting the full problem to an autonomous Coulomb
//!   system ([`homotopy`]),
//! - an adaptive Dormand–Prince integrator with dense output and a guard
//!   against the singularity ([`integrator`]),
//! - single shooting with damped Newton and natural-parameter continuation
//!   in λ ([`shooting`]),
//! - the explicit a priori bounds R, m, L and orbit verification ([`bounds`]),
//! - the Brouwer degree of the autonomous field ([`degree`]).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod degree;
pub mod error;
pub mod fields;
pub mod homotopy;
pub mod integrator;
pub mod quadrature;
pub mod relativity;
pub mod sampling;
pub mod shooting;

pub use error::{Error, Result};

/// Phase-space vector `(q, p)`.
pub type Vector6 = nalgebra::SVector<f64, 6>;
/// 6×6 real matrix (Jacobians, monodromy).
pub type Matrix6 = nalgebra::SMatrix<f64, 6, 6>;
pub use nalgebra::Vector3;
