//! Explicit a priori bounds for T-periodic solutions of the homotopy, valid
//! uniformly in λ:
//!
//! - upper: `|q(t)| < R + T`,
//! - lower: `|q(t)| > m = exp[−K₂ − T/ε − T·C_{∇V,B}/c − (R+T)‖h‖₁/c]`,
//! - momentum: `|p(t)| < L = T·M + 2‖h‖₁`, `M = max H(t, q)` on the annulus,
//!   `H = |∇V| + c₀|q|⁻² + |B|`.
//!
//! Here `c = c₀/2`: the near-origin inequality is imposed in the form
//! `−q·∇V(q) ≥ (c₀/2)|q|⁻¹ + c₁|q|^(−β)` so that it can hold for γ = 1 as
//! well, and `c₀/2` replaces `c₀` wherever the lower bound divides by it.
//! `K₂ = |ln ε|`.
//!
//! Every supremum is sampled (quasi-random points plus local ascent), never
//! proven; certificates carry the seed that reproduces them.
//!
//! The constants depend only on the [`FieldConfig`]; no λ enters:
//!
//! ```compile_fail
//! # use lfe_core::{bounds, homotopy::HomotopySystem};
//! fn reject(system: &HomotopySystem) {
//!     let _ = bounds::compute_r(system);
//! }
//! ```

use std::fmt;

use serde::Serialize;

use crate::fields::FieldConfig;
use crate::relativity::State;
use crate::sampling::{directions, log_radii, maximize_on_shell, SampledMax, ShellDomain};
use crate::shooting::{OrbitSolution, IDENTITY_TOLERANCE};
use crate::{Error, Result};

pub const DEFAULT_CERTIFICATE_SEED: u64 = 0x0C3B_71F1;

/// Open set `inner < |q| < outer`, `|p| < momentum` in phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Omega {
    pub inner: f64,
    pub outer: f64,
    pub momentum: f64,
}

impl Omega {
    pub fn contains(&self, x: &State) -> bool {
        self.violation(x).is_none()
    }

    pub fn violation(&self, x: &State) -> Option<String> {
        let r = x.q.norm();
        let p = x.p.norm();
        if !(r > self.inner) {
            Some(format!("|q| = {r:.6e} <= m = {:.6e}", self.inner))
        } else if !(r < self.outer) {
            Some(format!("|q| = {r:.6e} >= R+T = {:.6e}", self.outer))
        } else if !(p < self.momentum) {
            Some(format!("|p| = {p:.6e} >= L = {:.6e}", self.momentum))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateSettings {
    pub seed: u64,
    /// Quasi-random points for each sampled maximum.
    pub samples: usize,
    /// Directions per sphere in the far-field and near-origin checks.
    pub directions: usize,
    /// Local-ascent restarts for each maximum.
    pub restarts: usize,
    /// Base radius of the grid `R ∈ {2ᵏ r₀}`.
    pub r0: f64,
}

impl Default for CertificateSettings {
    fn default() -> Self {
        Self { seed: DEFAULT_CERTIFICATE_SEED, samples: 10_000, directions: 1000, restarts: 8, r0: 1.0 }
    }
}

const R_LIMIT: f64 = 1e6;
const R_MIN_EXPONENT: i32 = -20;
// The condition is imposed on the open set |q| > R; the innermost sampled
// sphere sits just outside R.
const OPEN_SHELL: f64 = 1.0 + 1e-9;
const TIME_SAMPLES: usize = 16;
const EPS_GRID_PER_OCTAVE: i32 = 8;
const EPS_GRID_OCTAVES: i32 = 20;
const NEAR_RADII: usize = 48;
const NEAR_DEPTH: f64 = 1e-8;

fn time_grid(period: f64) -> Vec<f64> {
    (0..TIME_SAMPLES).map(|i| period * i as f64 / TIME_SAMPLES as f64).collect()
}

fn check_forcing(config: &FieldConfig) -> Result<f64> {
    let mean_norm = config.mean_forcing().norm();
    let c_b = config.constants.c_b;
    if mean_norm > c_b {
        Ok(mean_norm - c_b)
    } else {
        Err(Error::ForcingTooWeak { mean_norm, c_b })
    }
}

/// Smallest `R = 2ᵏ r₀` for which, on sampled spheres just outside `R` and
/// at `2R, 4R, 8R`, `|B| < C_B` and `max(|∇V|, c₀|q|⁻²) < |h̄| − C_B`.
pub fn compute_r(config: &FieldConfig) -> Result<f64> {
    compute_r_with(config, &CertificateSettings::default())
}

pub fn compute_r_with(config: &FieldConfig, settings: &CertificateSettings) -> Result<f64> {
    let slack = check_forcing(config)?;
    let c0 = config.constants.c0;
    let c_b = config.constants.c_b;
    let dirs = directions(settings.directions, settings.seed);
    let times = time_grid(config.period());

    let admissible = |radius: f64| {
        [radius * OPEN_SHELL, 2.0 * radius, 4.0 * radius, 8.0 * radius]
            .iter()
            .all(|&r| {
                dirs.iter().all(|d| {
                    let q = d * r;
                    let grad = config.potential.gradient_unchecked(&q).norm().max(c0 / (r * r));
                    grad < slack
                        && times
                            .iter()
                            .all(|&t| config.magnetic.eval_unchecked(t, &q).norm() < c_b)
                })
            })
    };

    let mut k = R_MIN_EXPONENT;
    loop {
        let radius = settings.r0 * 2f64.powi(k);
        if radius > R_LIMIT {
            return Err(Error::RadiusNotFound { limit: R_LIMIT });
        }
        if admissible(radius) {
            return Ok(radius);
        }
        k += 1;
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerConstants {
    pub epsilon: f64,
    pub k2: f64,
    pub c_grad_v_b: f64,
    pub m: f64,
    /// `c₀/2`, the divisor used in the formula for `m`.
    pub c0_divisor: f64,
    pub l1_norm_h: f64,
    pub c_grad_v_b_at: SampledMax,
}

/// `m = exp[−K₂ − T/ε − T·C/c − (R+T)‖h‖₁/c]` with `c = c₀/2`.
pub fn lower_bound_formula(k2: f64, epsilon: f64, c_grad_v_b: f64, c0_divisor: f64, r: f64, period: f64, l1_norm_h: f64) -> f64 {
    (-k2 - period / epsilon - period * c_grad_v_b / c0_divisor - (r + period) * l1_norm_h / c0_divisor).exp()
}

/// `ε`, `K₂ = |ln ε|`, `C_{∇V,B}` and the lower bound `m`.
pub fn compute_lower_constants(config: &FieldConfig, r: f64) -> Result<LowerConstants> {
    compute_lower_constants_with(config, r, &CertificateSettings::default())
}

pub fn compute_lower_constants_with(
    config: &FieldConfig,
    r: f64,
    settings: &CertificateSettings,
) -> Result<LowerConstants> {
    let k = &config.constants;
    let period = config.period();
    if !(k.c0 > 0.0) {
        return Err(Error::InvalidArgument(format!("c0 = {} must be positive", k.c0)));
    }
    let upper = r + period;
    let cap = k.eps0.min(k.eps1).min(1.0).min(upper);
    if !(cap > 0.0) {
        return Err(Error::InvalidArgument(format!("eps0 = {}, eps1 = {} must be positive", k.eps0, k.eps1)));
    }
    let half_c0 = 0.5 * k.c0;
    let dirs = directions(settings.directions.min(256), settings.seed ^ 0xE95);

    let holds_below = |eps: f64| {
        log_radii(eps * NEAR_DEPTH, eps * (1.0 - 1e-9), NEAR_RADII)
            .into_iter()
            .all(|rad| {
                let rhs = half_c0 / rad + k.c1 * rad.powf(-k.beta);
                dirs.iter().all(|d| {
                    let q = d * rad;
                    -q.dot(&config.potential.gradient_unchecked(&q)) >= rhs
                })
            })
    };

    let epsilon = (0..=EPS_GRID_PER_OCTAVE * EPS_GRID_OCTAVES)
        .map(|j| cap * 2f64.powf(-(j as f64) / EPS_GRID_PER_OCTAVE as f64))
        .find(|&eps| holds_below(eps))
        .ok_or_else(|| {
            Error::InequalityFails(format!(
                "-q.gradV >= (c0/2)|q|^-1 + c1|q|^-beta fails below every eps <= {cap}"
            ))
        })?;
    let k2 = epsilon.ln().abs();

    let c_at = maximize_on_shell(
        |t, q| config.potential.gradient_unchecked(q).norm() + config.magnetic.eval_unchecked(t, q).norm(),
        ShellDomain { inner: epsilon, outer: upper, period },
        settings.samples,
        settings.restarts,
        settings.seed ^ 0xC0,
    );
    let c_grad_v_b = c_at.value;
    if !c_grad_v_b.is_finite() {
        return Err(Error::NonFiniteBound("C_gradV_B"));
    }
    let l1_norm_h = config.forcing.l1_norm();
    let m = lower_bound_formula(k2, epsilon, c_grad_v_b, half_c0, r, period, l1_norm_h);
    if !(m > 0.0) {
        return Err(Error::NonFiniteBound("m (underflow)"));
    }
    Ok(LowerConstants { epsilon, k2, c_grad_v_b, m, c0_divisor: half_c0, l1_norm_h, c_grad_v_b_at: c_at })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentumBound {
    pub big_m: f64,
    pub l: f64,
    pub big_m_at: SampledMax,
}

/// `M = max H(t, q)` over `m ≤ |q| ≤ R + T`, `L = T·M + 2‖h‖₁`.
pub fn compute_momentum_bound(config: &FieldConfig, m: f64, r: f64) -> Result<MomentumBound> {
    compute_momentum_bound_with(config, m, r, &CertificateSettings::default())
}

pub fn compute_momentum_bound_with(
    config: &FieldConfig,
    m: f64,
    r: f64,
    settings: &CertificateSettings,
) -> Result<MomentumBound> {
    let period = config.period();
    let upper = r + period;
    if !(m > 0.0 && m < upper) {
        return Err(Error::InvalidArgument(format!("need 0 < m < R+T, got m = {m}, R+T = {upper}")));
    }
    let c0 = config.constants.c0;
    let at = maximize_on_shell(
        |t, q| {
            config.potential.gradient_unchecked(q).norm()
                + c0 / q.norm_squared()
                + config.magnetic.eval_unchecked(t, q).norm()
        },
        ShellDomain { inner: m, outer: upper, period },
        settings.samples,
        settings.restarts,
        settings.seed ^ 0x4D,
    );
    let big_m = at.value;
    let l = period * big_m + 2.0 * config.forcing.l1_norm();
    if !big_m.is_finite() || !l.is_finite() {
        return Err(Error::NonFiniteBound("M"));
    }
    Ok(MomentumBound { big_m, l, big_m_at: at })
}

/// All constants for one configuration.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsCertificate {
    pub r: f64,
    pub upper: f64,
    pub epsilon: f64,
    pub k2: f64,
    pub c_grad_v_b: f64,
    pub m: f64,
    pub big_m: f64,
    pub l: f64,
    pub period: f64,
    pub l1_norm_h: f64,
    pub c0_divisor: f64,
    pub seed: u64,
    pub samples: usize,
    pub sampled: bool,
    pub c_grad_v_b_at: SampledMax,
    pub big_m_at: SampledMax,
}

impl BoundsCertificate {
    pub fn compute(config: &FieldConfig) -> Result<Self> {
        Self::compute_with(config, &CertificateSettings::default())
    }

    pub fn compute_with(config: &FieldConfig, settings: &CertificateSettings) -> Result<Self> {
        let r = compute_r_with(config, settings)?;
        let lower = compute_lower_constants_with(config, r, settings)?;
        let momentum = compute_momentum_bound_with(config, lower.m, r, settings)?;
        Ok(Self {
            r,
            upper: r + config.period(),
            epsilon: lower.epsilon,
            k2: lower.k2,
            c_grad_v_b: lower.c_grad_v_b,
            m: lower.m,
            big_m: momentum.big_m,
            l: momentum.l,
            period: config.period(),
            l1_norm_h: lower.l1_norm_h,
            c0_divisor: lower.c0_divisor,
            seed: settings.seed,
            samples: settings.samples,
            sampled: true,
            c_grad_v_b_at: lower.c_grad_v_b_at,
            big_m_at: momentum.big_m_at,
        })
    }

    /// The numerical domain `m < |q| < R+T`, `|p| < L`.
    pub fn omega(&self) -> Omega {
        Omega { inner: self.m, outer: self.upper, momentum: self.l }
    }

    /// `m` recomputed from the stored constants.
    pub fn recompute_m(&self) -> f64 {
        lower_bound_formula(self.k2, self.epsilon, self.c_grad_v_b, self.c0_divisor, self.r, self.period, self.l1_norm_h)
    }
}

impl fmt::Display for BoundsCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a priori bounds (sampled, seed {:#x}, {} samples per maximum)", self.seed, self.samples)?;
        let rows: [(&str, f64, String); 8] = [
            ("R", self.r, "smallest 2^k with |B| < C_B and max(|gradV|, c0/|q|^2) < |mean h| - C_B beyond R".into()),
            ("R+T", self.upper, "upper bound on |q(t)|".into()),
            ("eps", self.epsilon, "largest grid value with -q.gradV >= (c0/2)/|q| + c1/|q|^beta below it".into()),
            ("K2", self.k2, "|ln eps|".into()),
            (
                "C_gradV_B",
                self.c_grad_v_b,
                format!("max |gradV|+|B| on eps <= |q| <= R+T, at |q| = {:.6e}", self.c_grad_v_b_at.q.norm()),
            ),
            (
                "m",
                self.m,
                format!("exp[-K2 - T/eps - T*C/c - (R+T)|h|_1/c], c = c0/2 = {}, |h|_1 = {:.10e}", self.c0_divisor, self.l1_norm_h),
            ),
            (
                "M",
                self.big_m,
                format!("max |gradV| + c0/|q|^2 + |B| on m <= |q| <= R+T, at |q| = {:.6e}", self.big_m_at.q.norm()),
            ),
            ("L", self.l, "T*M + 2|h|_1".into()),
        ];
        for (name, value, provenance) in rows {
            writeln!(f, "  {name:<10} {value:>22.15e}   {provenance}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst margin over all samples; negative on failure.
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub samples: usize,
    pub checks: Vec<VerificationCheck>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&VerificationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "orbit verification ({} samples)", self.samples)?;
        for c in &self.checks {
            writeln!(f, "  [{}] {:<16} margin {:.6e}", if c.passed { "pass" } else { "FAIL" }, c.name, c.margin)?;
        }
        Ok(())
    }
}

const VERIFY_SAMPLES: usize = 1000;

/// Checks an orbit against the certificate at every node and on 10³
/// dense-output samples, together with its stored identity residuals.
pub fn verify_orbit(orbit: &OrbitSolution, cert: &BoundsCertificate) -> VerificationReport {
    let traj = &orbit.trajectory;
    let mut states: Vec<State> = traj.nodes().map(|(_, s)| s).collect();
    states.extend(traj.sample(VERIFY_SAMPLES).into_iter().map(|(_, s)| s));

    let fold = |f: &dyn Fn(&State) -> f64| states.iter().map(f).fold(f64::INFINITY, f64::min);
    let lower = fold(&|s| s.q.norm() - cert.m);
    let upper = fold(&|s| cert.upper - s.q.norm());
    let momentum = fold(&|s| cert.l - s.p.norm());
    let speed = fold(&|s| 1.0 - s.velocity().norm());

    let id = &orbit.identities;
    let mean_margin = IDENTITY_TOLERANCE - id.mean_residual();
    let virial_margin = IDENTITY_TOLERANCE - id.virial_residual();
    let sign_margin = IDENTITY_TOLERANCE - id.virial_lhs;

    let check = |name, margin: f64| VerificationCheck { name, passed: margin > 0.0, margin };
    VerificationReport {
        samples: states.len(),
        checks: vec![
            check("lower |q| > m", lower),
            check("upper |q| < R+T", upper),
            check("momentum |p| < L", momentum),
            check("speed |v| < 1", speed),
            check("mean identity", mean_margin),
            check("virial identity", virial_margin),
            check("virial sign", sign_margin),
        ],
    }
}

/// Worst violation of `omega` over trajectory nodes, if any.
pub fn first_violation(omega: &Omega, states: impl IntoIterator<Item = State>) -> Option<String> {
    states.into_iter().find_map(|s| omega.violation(&s))
}
