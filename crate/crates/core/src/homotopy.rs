//! The λ-homotopy between the autonomous Coulomb problem (λ = 0) and the
//! full Lorentz force equation (λ = 1), written as a first-order system in
//! position and momentum:
//!
//! ```text
//! q' = φ⁻¹(p)
//! p' = −∇V_λ(q) + h_λ(t) + λ φ⁻¹(p) × B(t, q)
//! V_λ = λV + (1 − λ) c₀/|q|,   h_λ = λh + (1 − λ) h̄
//! ```

use nalgebra::{Matrix3, Vector3};

use crate::fields::FieldConfig;
use crate::relativity::{gamma_of, momentum_to_velocity, State};
use crate::{Error, Matrix6, Result, Vector6};

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda = {lambda} outside [0, 1]")))
    }
}

fn check_position(q: &Vector3<f64>) -> Result<()> {
    if q.norm_squared() > 0.0 {
        Ok(())
    } else {
        Err(Error::Singularity)
    }
}

#[derive(Debug, Clone)]
pub struct HomotopySystem {
    pub config: FieldConfig,
}

impl HomotopySystem {
    pub fn new(config: FieldConfig) -> Self {
        Self { config }
    }

    pub fn period(&self) -> f64 {
        self.config.period()
    }

    /// Coulomb strength of the λ = 0 endpoint.
    pub fn c0(&self) -> f64 {
        self.config.constants.c0
    }

    pub fn mean_forcing(&self) -> Vector3<f64> {
        self.config.forcing.mean
    }

    /// The λ = 0 field.
    pub fn autonomous(&self) -> AutonomousField {
        AutonomousField { c0: self.c0(), h_bar: self.mean_forcing() }
    }

    /// `h_λ` is constant in time (λ = 0 or no active harmonics).
    pub fn is_autonomous_at(&self, lambda: f64) -> bool {
        lambda == 0.0 || !self.config.forcing.is_time_dependent()
    }

    /// `∇V_λ(q) = λ∇V(q) − (1 − λ) c₀ q |q|⁻³`.
    pub fn grad_v_lambda(&self, q: &Vector3<f64>, lambda: f64) -> Result<Vector3<f64>> {
        check_lambda(lambda)?;
        check_position(q)?;
        Ok(self.grad_v_lambda_unchecked(q, lambda))
    }

    #[inline]
    fn grad_v_lambda_unchecked(&self, q: &Vector3<f64>, lambda: f64) -> Vector3<f64> {
        let r2 = q.norm_squared();
        let coulomb = -self.c0() / (r2 * r2.sqrt()) * q;
        if lambda == 0.0 {
            return coulomb;
        }
        let full = self.config.potential.gradient_unchecked(q);
        if lambda == 1.0 {
            return full;
        }
        lambda * full + (1.0 - lambda) * coulomb
    }

    /// `V_λ(q)`.
    pub fn v_lambda(&self, q: &Vector3<f64>, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        check_position(q)?;
        let coulomb = self.c0() / q.norm();
        Ok(match lambda {
            0.0 => coulomb,
            1.0 => self.config.potential.value(q)?,
            l => l * self.config.potential.value(q)? + (1.0 - l) * coulomb,
        })
    }

    /// `h_λ(t) = λh(t) + (1 − λ)h̄`.
    pub fn h_lambda(&self, t: f64, lambda: f64) -> Result<Vector3<f64>> {
        check_lambda(lambda)?;
        Ok(self.h_lambda_unchecked(t, lambda))
    }

    #[inline]
    fn h_lambda_unchecked(&self, t: f64, lambda: f64) -> Vector3<f64> {
        let f = &self.config.forcing;
        if lambda == 0.0 {
            f.mean
        } else {
            lambda * f.eval(t) + (1.0 - lambda) * f.mean
        }
    }

    /// Right-hand side `f(t, x; λ)` as `(q', p')`.
    pub fn rhs(&self, t: f64, x: &State, lambda: f64) -> Result<Vector6> {
        check_lambda(lambda)?;
        check_position(&x.q)?;
        Ok(self.rhs_vector(t, &x.to_vector(), lambda))
    }

    /// Unchecked right-hand side on the packed state; used by the integrator.
    #[inline]
    pub fn rhs_vector(&self, t: f64, x: &Vector6, lambda: f64) -> Vector6 {
        let q = x.fixed_rows::<3>(0).into_owned();
        let p = x.fixed_rows::<3>(3).into_owned();
        let v = momentum_to_velocity(&p);
        let mut force = -self.grad_v_lambda_unchecked(&q, lambda) + self.h_lambda_unchecked(t, lambda);
        if lambda != 0.0 {
            force += lambda * v.cross(&self.config.magnetic.eval_unchecked(t, &q));
        }
        pack(&v, &force)
    }

    /// The unhomotoped field `(v, −∇V + h + v × B)`.
    pub fn lfe_rhs(&self, t: f64, x: &State) -> Result<Vector6> {
        check_position(&x.q)?;
        let v = x.velocity();
        let c = &self.config;
        let force = -c.potential.gradient(&x.q)? + c.forcing.eval(t) + v.cross(&c.magnetic.eval(t, &x.q)?);
        Ok(pack(&v, &force))
    }
}

#[inline]
fn pack(a: &Vector3<f64>, b: &Vector3<f64>) -> Vector6 {
    Vector6::new(a.x, a.y, a.z, b.x, b.y, b.z)
}

/// `f₀(x) = (φ⁻¹(p), h̄ + c₀ q |q|⁻³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutonomousField {
    pub c0: f64,
    pub h_bar: Vector3<f64>,
}

/// Value and derivative of `f₀` at one point.
///
/// The Jacobian columns are ordered `(p, q)` while the rows follow the
/// components of `f₀` (`φ⁻¹(p)` first), so the matrix is block diagonal:
///
/// ```text
/// [ ∂φ⁻¹/∂p        0        ]
/// [     0     ∂(c₀q/|q|³)/∂q ]
/// ```
///
/// With the columns reordered to `(q, p)` the determinant changes sign.
#[derive(Debug, Clone, Copy)]
pub struct F0Jacobian {
    pub value: Vector6,
    pub jacobian: Matrix6,
    /// LU determinant of `jacobian`.
    pub det_direct: f64,
    /// `−2c₀³|q|⁻⁹[(1+|p|²)^(−3/2) − |p|²(1+|p|²)^(−5/2)]`.
    pub det_closed_form: f64,
}

impl AutonomousField {
    pub fn value(&self, x: &State) -> Result<Vector6> {
        check_position(&x.q)?;
        let r2 = x.q.norm_squared();
        Ok(pack(
            &momentum_to_velocity(&x.p),
            &(self.h_bar + self.c0 / (r2 * r2.sqrt()) * x.q),
        ))
    }

    /// Momentum block `δᵢⱼ(1+|p|²)^(−1/2) − pᵢpⱼ(1+|p|²)^(−3/2)`.
    pub fn momentum_block(p: &Vector3<f64>) -> Matrix3<f64> {
        let g = gamma_of(p);
        Matrix3::identity() / g - p * p.transpose() / (g * g * g)
    }

    /// Position block `c₀(δᵢⱼ|q|⁻³ − 3qᵢqⱼ|q|⁻⁵)`.
    pub fn position_block(&self, q: &Vector3<f64>) -> Matrix3<f64> {
        let r2 = q.norm_squared();
        let r3 = r2 * r2.sqrt();
        self.c0 * (Matrix3::identity() / r3 - 3.0 * q * q.transpose() / (r3 * r2))
    }

    pub fn closed_form_det(&self, x: &State) -> f64 {
        let s = 1.0 + x.p.norm_squared();
        let bracket = s.powf(-1.5) - x.p.norm_squared() * s.powf(-2.5);
        -2.0 * self.c0.powi(3) * x.q.norm().powi(-9) * bracket
    }

    pub fn f0_and_jacobian(&self, x: &State) -> Result<F0Jacobian> {
        let value = self.value(x)?;
        let mut jacobian = Matrix6::zeros();
        jacobian
            .fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&Self::momentum_block(&x.p));
        jacobian
            .fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&self.position_block(&x.q));
        Ok(F0Jacobian {
            value,
            jacobian,
            det_direct: jacobian.determinant(),
            det_closed_form: self.closed_form_det(x),
        })
    }
}
