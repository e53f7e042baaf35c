use nalgebra::Vector3;
use thiserror::Error;

use crate::relativity::State;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("velocity {speed} is not strictly subluminal (must be < 1 - 1e-12)")]
    Superluminal { speed: f64 },

    #[error("field evaluated at the singularity q = 0")]
    Singularity,

    #[error("trajectory approached the singularity: |q| = {radius:.3e} < r_min at t = {t}")]
    SingularityApproach { t: f64, radius: f64, state: State },

    #[error("integrator exceeded {max_steps} steps at t = {t}")]
    MaxStepsExceeded { max_steps: usize, t: f64 },

    #[error("step size underflow (h = {h:.3e}) at t = {t}")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("misuse: {0}")]
    Misuse(String),

    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(String),

    #[error("shooting Jacobian is singular (condition estimate {condition:.3e})")]
    SingularJacobian { condition: f64 },

    #[error("iterate left the numerical domain: {0}")]
    LeftDomain(String),

    #[error("hypothesis violated: |mean(h)| = {mean_norm} must exceed C_B = {c_b}")]
    ForcingTooWeak { mean_norm: f64, c_b: f64 },

    #[error("no admissible radius R up to {limit:e} satisfies the far-field conditions")]
    RadiusNotFound { limit: f64 },

    #[error("near-origin inequality fails for every epsilon on the grid: {0}")]
    InequalityFails(String),

    #[error("non-finite bound constant: {0}")]
    NonFiniteBound(&'static str),

    #[error("mean forcing vanishes; the autonomous field has no zero")]
    DegenerateForcing,

    #[error("zero |q*| = {radius} lies outside the annulus ({inner}, {outer})")]
    ZeroOutsideOmega { radius: f64, inner: f64, outer: f64 },

    #[error("Jacobian determinants disagree: {0}")]
    InconsistentDeterminants(String),

    #[error("second zero of f0 found at q = {q:?}")]
    MultipleZeros { q: Vector3<f64> },
}
