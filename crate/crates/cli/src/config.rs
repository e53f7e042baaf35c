//! TOML run configuration. Every key is checked; defaults are filled in by
//! [`parse_config_str`] so that the echoed configuration describes the run
//! completely.

use std::path::Path;

use lfe_core::fields::{
    sup_field_beyond, ElectricPotential, FieldConfig, Forcing, Harmonic, HypothesisConstants, MagneticField,
    DEFAULT_VALIDATION_SEED,
};
use lfe_core::integrator::IntegratorConfig;
use lfe_core::relativity::State;
use lfe_core::shooting::{ContinuationSettings, NewtonSettings};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::CliError;

type V3 = [f64; 3];

fn v3(a: &V3) -> Vector3<f64> {
    Vector3::from(*a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrate: Option<IntegrateSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub potential: PotentialSpec,
    #[serde(default)]
    pub magnetic: MagneticSpec,
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub hypotheses: HypothesesSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `V = c0 γ⁻¹ |q|^(−γ)`.
    GeneralizedCoulomb { c0: f64, gamma: f64 },
    Coulomb { c0: f64 },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MagneticSpec {
    #[default]
    Zero,
    Uniform { b: V3 },
    Abc { a: f64, b: f64, c: f64 },
    Dipole { moment: V3 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub period: f64,
    pub mean: V3,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub harmonics: Vec<HarmonicSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSpec {
    pub k: u32,
    #[serde(default)]
    pub cos: V3,
    #[serde(default)]
    pub sin: V3,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesesSection {
    pub c0: Option<f64>,
    pub gamma: Option<f64>,
    pub eps0: Option<f64>,
    pub c_b: Option<f64>,
    pub c1: Option<f64>,
    pub beta: Option<f64>,
    pub eps1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Guard radius; absent means `m/2` from the certificate, or `1e-6`
    /// where no certificate is computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self { rtol: d.rtol, atol: d.atol, max_steps: d.max_steps, r_min: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub q: V3,
    pub p: V3,
}

impl StateSpec {
    pub fn state(&self) -> State {
        State::new(v3(&self.q), v3(&self.p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub seed: u64,
    pub samples: usize,
    pub newton_tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    pub fd_step: f64,
    pub max_condition: f64,
    /// λ used by `find-orbit`.
    pub lambda: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub growth: f64,
    /// Initial guess for `find-orbit`; the λ = 0 equilibrium when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<StateSpec>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let n = NewtonSettings::default();
        let c = ContinuationSettings::default();
        Self {
            seed: DEFAULT_VALIDATION_SEED,
            samples: 10_000,
            newton_tolerance: n.tolerance,
            max_iterations: n.max_iterations,
            max_halvings: n.max_halvings,
            fd_step: n.fd_step,
            max_condition: n.max_condition,
            lambda: 0.0,
            initial_step: c.initial_step,
            min_step: c.min_step,
            growth: c.growth,
            guess: None,
        }
    }
}

impl SolverSection {
    pub fn newton(&self) -> NewtonSettings {
        NewtonSettings {
            tolerance: self.newton_tolerance,
            max_iterations: self.max_iterations,
            max_halvings: self.max_halvings,
            fd_step: self.fd_step,
            max_condition: self.max_condition,
        }
    }

    pub fn continuation(&self) -> ContinuationSettings {
        ContinuationSettings {
            initial_step: self.initial_step,
            min_step: self.min_step,
            growth: self.growth,
            ..ContinuationSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSection {
    pub q: V3,
    pub p: V3,
    #[serde(default = "one")]
    pub lambda: f64,
    /// End time; one period when absent.
    pub t_end: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Uniform samples per exported trajectory.
    pub samples: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { samples: 1001 }
    }
}

impl PotentialSpec {
    fn model(&self) -> ElectricPotential {
        match *self {
            Self::GeneralizedCoulomb { c0, gamma } => ElectricPotential::GeneralizedCoulomb { c0, gamma },
            Self::Coulomb { c0 } => ElectricPotential::coulomb(c0),
            Self::Zero => ElectricPotential::zero(),
        }
    }

    fn natural_constants(&self) -> (f64, f64) {
        match *self {
            Self::GeneralizedCoulomb { c0, gamma } => (c0, gamma),
            Self::Coulomb { c0 } => (c0, 1.0),
            Self::Zero => (0.0, 1.0),
        }
    }
}

impl MagneticSpec {
    fn model(&self) -> MagneticField {
        match self {
            Self::Zero => MagneticField::Zero,
            Self::Uniform { b } => MagneticField::Uniform(v3(b)),
            &Self::Abc { a, b, c } => MagneticField::Abc { a, b, c },
            Self::Dipole { moment } => MagneticField::Dipole { moment: v3(moment) },
        }
    }

    /// `(c1, β)` with `|B| ≤ c1|q|^(−β−1)` near the origin: exact for the
    /// dipole; for bounded fields any `c1 ≥ sup|B|` (at least 1) works.
    fn natural_singular_bound(&self, gamma: f64) -> (f64, f64) {
        let bounded = |sup: f64| (sup.max(1.0), 0.5 * gamma);
        match self {
            Self::Zero => bounded(0.0),
            Self::Uniform { b } => bounded(v3(b).norm()),
            &Self::Abc { a, b, c } => {
                let (a, b, c) = (a.abs(), b.abs(), c.abs());
                bounded(((a + c).powi(2) + (a + b).powi(2) + (b + c).powi(2)).sqrt())
            }
            Self::Dipole { .. } => self.model().natural_singular_bound().unwrap_or((1.0, 0.5 * gamma)),
        }
    }
}

impl ForcingSpec {
    fn model(&self) -> Forcing {
        Forcing {
            period: self.period,
            mean: v3(&self.mean),
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic { k: h.k, cos: v3(&h.cos), sin: v3(&h.sin) })
                .collect(),
        }
    }
}

pub const DEFAULT_EPS: f64 = 0.5;
/// `C_B` for a field that vanishes beyond `|q| = 1`, relative to `|h̄|`.
pub const ZERO_FIELD_C_B: f64 = 1e-3;

impl RunConfig {
    /// Fills every absent hypothesis constant.
    pub fn apply_defaults(&mut self) {
        let f = &mut self.field;
        let (c0, gamma) = f.potential.natural_constants();
        let h = &mut f.hypotheses;
        let gamma = *h.gamma.get_or_insert(gamma);
        h.c0.get_or_insert(c0);
        h.eps0.get_or_insert(DEFAULT_EPS);
        h.eps1.get_or_insert(DEFAULT_EPS);
        if h.c1.is_none() || h.beta.is_none() {
            let (c1, beta) = f.magnetic.natural_singular_bound(gamma);
            h.c1.get_or_insert(c1);
            h.beta.get_or_insert(beta);
        }
        if h.c_b.is_none() {
            let sup = sup_field_beyond(&f.magnetic.model(), 1.0, f.forcing.period, self.solver.seed);
            let c_b = if sup > 0.0 { sup } else { ZERO_FIELD_C_B * v3(&f.forcing.mean).norm() };
            h.c_b = Some(c_b);
        }
    }

    pub fn constants(&self) -> HypothesisConstants {
        let h = &self.field.hypotheses;
        let get = |v: Option<f64>| v.unwrap_or(f64::NAN);
        HypothesisConstants {
            c0: get(h.c0),
            gamma: get(h.gamma),
            eps0: get(h.eps0),
            c_b: get(h.c_b),
            c1: get(h.c1),
            beta: get(h.beta),
            eps1: get(h.eps1),
        }
    }

    pub fn field_config(&self) -> FieldConfig {
        FieldConfig {
            potential: self.field.potential.model(),
            magnetic: self.field.magnetic.model(),
            forcing: self.field.forcing.model(),
            constants: self.constants(),
        }
    }

    /// Integrator settings, with the guard at `m/2` when `m` is known.
    pub fn integrator(&self, m: Option<f64>) -> IntegratorConfig {
        let s = &self.integrator;
        let r_min = s.r_min.or(m.map(|m| 0.5 * m)).unwrap_or(IntegratorConfig::default().r_min);
        IntegratorConfig { rtol: s.rtol, atol: s.atol, max_steps: s.max_steps, r_min }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, CliError> {
    let mut config: RunConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    if config.field.forcing.period.is_nan() || config.field.forcing.period <= 0.0 {
        return Err(CliError::Parse(format!(
            "field.forcing.period = {} must be positive",
            config.field.forcing.period
        )));
    }
    config.apply_defaults();
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
