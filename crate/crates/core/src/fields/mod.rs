//! Electric potentials, magnetic fields and periodic forcings.
//!
//! The electric field is `E(t, q) = −∇V(q) + h(t)`; the magnetic field
//! `B(t, q)` enters through the Lorentz term `v × B`. All variants are static
//! in time except the forcing `h`.

mod validate;

pub use validate::{
    sup_field_beyond, validate_hypotheses, validate_hypotheses_with_seed, HypothesisCheck,
    ValidationReport, DEFAULT_VALIDATION_SEED,
};

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::Serialize;

use crate::quadrature;
use crate::{Error, Result};

type ScalarFn = dyn Fn(&Vector3<f64>) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync;

/// A user-supplied potential given by closures for `V` and `∇V`.
pub struct CustomPotential {
    pub name: String,
    value: Box<ScalarFn>,
    gradient: Box<VectorFn>,
}

impl CustomPotential {
    pub fn new<V, G>(name: impl Into<String>, value: V, gradient: G) -> Self
    where
        V: Fn(&Vector3<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Box::new(value),
            gradient: Box::new(gradient),
        }
    }
}

impl fmt::Debug for CustomPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPotential").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum ElectricPotential {
    /// `V(q) = c₀ γ⁻¹ |q|^(−γ)`; `γ = 1` is the Coulomb potential `c₀/|q|`.
    /// `c₀ = 0` gives the zero potential.
    GeneralizedCoulomb { c0: f64, gamma: f64 },
    Custom(Arc<CustomPotential>),
}

impl ElectricPotential {
    pub fn coulomb(c0: f64) -> Self {
        Self::GeneralizedCoulomb { c0, gamma: 1.0 }
    }

    pub fn zero() -> Self {
        Self::GeneralizedCoulomb { c0: 0.0, gamma: 1.0 }
    }

    pub fn value(&self, q: &Vector3<f64>) -> Result<f64> {
        let r = q.norm();
        if r == 0.0 {
            return Err(Error::Singularity);
        }
        Ok(match self {
            Self::GeneralizedCoulomb { c0, gamma } => c0 / gamma * r.powf(-gamma),
            Self::Custom(c) => (c.value)(q),
        })
    }

    /// `∇V(q)`.
    pub fn gradient(&self, q: &Vector3<f64>) -> Result<Vector3<f64>> {
        if q.norm_squared() == 0.0 {
            return Err(Error::Singularity);
        }
        Ok(self.gradient_unchecked(q))
    }

    #[inline]
    pub(crate) fn gradient_unchecked(&self, q: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Self::GeneralizedCoulomb { c0, gamma } => {
                let r2 = q.norm_squared();
                // -c0 q |q|^(-γ-2)
                -c0 * r2.powf(-0.5 * gamma - 1.0) * q
            }
            Self::Custom(c) => (c.gradient)(q),
        }
    }
}

/// Convenience form of [`ElectricPotential::gradient`].
pub fn grad_v(potential: &ElectricPotential, q: &Vector3<f64>) -> Result<Vector3<f64>> {
    potential.gradient(q)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MagneticField {
    Zero,
    Uniform(Vector3<f64>),
    /// Arnold–Beltrami–Childress field
    /// `(A sin q₃ + C cos q₂, B sin q₁ + A cos q₃, C sin q₂ + B cos q₁)`.
    Abc { a: f64, b: f64, c: f64 },
    /// `B(q) = 3q(μ·q)|q|⁻⁵ − μ|q|⁻³`.
    Dipole { moment: Vector3<f64> },
}

impl MagneticField {
    pub fn is_singular(&self) -> bool {
        matches!(self, Self::Dipole { .. })
    }

    pub fn eval(&self, t: f64, q: &Vector3<f64>) -> Result<Vector3<f64>> {
        if self.is_singular() && q.norm_squared() == 0.0 {
            return Err(Error::Singularity);
        }
        Ok(self.eval_unchecked(t, q))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, _t: f64, q: &Vector3<f64>) -> Vector3<f64> {
        match self {
            Self::Zero => Vector3::zeros(),
            Self::Uniform(b) => *b,
            Self::Abc { a, b, c } => Vector3::new(
                a * q.z.sin() + c * q.y.cos(),
                b * q.x.sin() + a * q.z.cos(),
                c * q.y.sin() + b * q.x.cos(),
            ),
            Self::Dipole { moment } => {
                let r2 = q.norm_squared();
                let r = r2.sqrt();
                let inv3 = 1.0 / (r2 * r);
                (3.0 * moment.dot(q) / r2 * q - moment) * inv3
            }
        }
    }

    /// Default `(c₁, β)` for the near-origin bound `|B| ≤ c₁|q|^(−β−1)`, when
    /// the variant determines them.
    pub fn natural_singular_bound(&self) -> Option<(f64, f64)> {
        match self {
            Self::Dipole { moment } => Some((2.0 * moment.norm(), 2.0)),
            _ => None,
        }
    }
}

/// Convenience form of [`MagneticField::eval`].
pub fn eval_b(magnetic: &MagneticField, t: f64, q: &Vector3<f64>) -> Result<Vector3<f64>> {
    magnetic.eval(t, q)
}

/// One harmonic `a cos(2πkt/T) + b sin(2πkt/T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Harmonic {
    pub k: u32,
    pub cos: Vector3<f64>,
    pub sin: Vector3<f64>,
}

/// T-periodic forcing `h(t) = a₀ + Σ aₖ cos(2πkt/T) + bₖ sin(2πkt/T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forcing {
    pub period: f64,
    pub mean: Vector3<f64>,
    pub harmonics: Vec<Harmonic>,
}

impl Forcing {
    pub fn constant(period: f64, mean: Vector3<f64>) -> Self {
        Self { period, mean, harmonics: Vec::new() }
    }

    pub fn with_harmonic(mut self, k: u32, cos: Vector3<f64>, sin: Vector3<f64>) -> Self {
        self.harmonics.push(Harmonic { k, cos, sin });
        self
    }

    pub fn eval(&self, t: f64) -> Vector3<f64> {
        let w = std::f64::consts::TAU * t / self.period;
        self.harmonics.iter().fold(self.mean, |acc, h| {
            let (s, c) = (h.k as f64 * w).sin_cos();
            acc + h.cos * c + h.sin * s
        })
    }

    /// True when some harmonic has a non-zero coefficient.
    pub fn is_time_dependent(&self) -> bool {
        self.harmonics
            .iter()
            .any(|h| h.cos.norm_squared() > 0.0 || h.sin.norm_squared() > 0.0)
    }

    /// `∫₀ᵀ |h(t)| dt` by adaptive quadrature.
    pub fn l1_norm(&self) -> f64 {
        if !self.is_time_dependent() {
            return self.period * self.mean.norm();
        }
        // Split at the harmonic grid so kinks of |h| sit near panel edges.
        let kmax = self.harmonics.iter().map(|h| h.k).max().unwrap_or(1).max(1) as usize;
        let pieces = 4 * kmax;
        let dt = self.period / pieces as f64;
        (0..pieces)
            .map(|i| {
                let a = i as f64 * dt;
                quadrature::integrate_scalar(|t| self.eval(t).norm(), a, a + dt, 1e-12, 1e-15)
            })
            .sum()
    }
}

/// `(h̄, ‖h‖₁)`; the mean is the constant coefficient.
pub fn forcing_stats(forcing: &Forcing) -> (Vector3<f64>, f64) {
    (forcing.mean, forcing.l1_norm())
}

/// The constants appearing in the hypotheses on `V` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisConstants {
    pub c0: f64,
    pub gamma: f64,
    pub eps0: f64,
    pub c_b: f64,
    pub c1: f64,
    pub beta: f64,
    pub eps1: f64,
}

/// Complete description of one problem instance.
#[derive(Debug, Clone)]
pub struct FieldConfig {
    pub potential: ElectricPotential,
    pub magnetic: MagneticField,
    pub forcing: Forcing,
    pub constants: HypothesisConstants,
}

impl FieldConfig {
    pub fn period(&self) -> f64 {
        self.forcing.period
    }

    pub fn mean_forcing(&self) -> Vector3<f64> {
        self.forcing.mean
    }
}
