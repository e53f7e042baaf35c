use std::fmt;

use nalgebra::Vector3;
use serde::Serialize;

use super::{FieldConfig, MagneticField};
use crate::sampling::{directions, log_radii, Halton};

pub const DEFAULT_VALIDATION_SEED: u64 = 0x4C46_4531;

const FAR_RADII: [f64; 4] = [1e1, 1e2, 1e3, 1e4];
const SIGN_CLOUD: usize = 10_000;
const DIRECTIONS: usize = 256;
const TIMES: usize = 16;
const NEAR_RADII: usize = 48;
// Relative slack for inequalities that hold with equality analytically.
const ROUND_OFF: f64 = 1e-12;

/// Outcome of one sampled hypothesis check.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub id: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    /// Worst sampled margin; negative when the check fails.
    pub margin: f64,
    pub sampled: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "hypothesis validation (seed {:#x}; sampled, not proven)", self.seed)?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {:<8} {:<40} margin {:>12.5e}  {}",
                if c.passed { "pass" } else { "FAIL" },
                c.id,
                c.statement,
                c.margin,
                c.detail
            )?;
        }
        Ok(())
    }
}

fn times(period: f64) -> Vec<f64> {
    if !(period > 0.0) {
        return vec![0.0];
    }
    (0..TIMES).map(|i| period * i as f64 / TIMES as f64).collect()
}

/// Sampled `sup |B(t, q)|` over `|q| ≥ radius`, on the shells
/// `radius · {1, 2, 4, …, 2¹⁶}` crossed with a time grid.
pub fn sup_field_beyond(magnetic: &MagneticField, radius: f64, period: f64, seed: u64) -> f64 {
    let dirs = directions(DIRECTIONS, seed);
    let ts = times(period);
    let mut sup = 0.0f64;
    for k in 0..=16 {
        let r = radius * f64::from(1u32 << k);
        for d in &dirs {
            let q = d * r;
            for &t in &ts {
                sup = sup.max(magnetic.eval_unchecked(t, &q).norm());
            }
        }
    }
    sup
}

pub fn validate_hypotheses(config: &FieldConfig) -> ValidationReport {
    validate_hypotheses_with_seed(config, DEFAULT_VALIDATION_SEED)
}

/// Checks (H1)–(H4), `β ∈ (0, γ)`, positivity of the constants and
/// `|h̄| > C_B` on reproducible sample sets. Violations are reported, never
/// raised.
pub fn validate_hypotheses_with_seed(config: &FieldConfig, seed: u64) -> ValidationReport {
    let k = &config.constants;
    let dirs = directions(DIRECTIONS, seed);
    let ts = times(config.period());
    let mut checks = Vec::new();

    let positive = [
        ("c0", k.c0),
        ("eps0", k.eps0),
        ("C_B", k.c_b),
        ("c1", k.c1),
        ("eps1", k.eps1),
        ("T", config.period()),
    ];
    let worst = positive
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .copied()
        .unwrap();
    let all_pos = positive.iter().all(|(_, v)| *v > 0.0 && v.is_finite()) && k.gamma >= 1.0;
    checks.push(HypothesisCheck {
        id: "consts",
        statement: "c0, eps0, C_B, c1, eps1, T > 0 and gamma >= 1",
        passed: all_pos,
        margin: worst.1.min(k.gamma - 1.0),
        sampled: false,
        detail: if all_pos {
            String::new()
        } else {
            format!("smallest constant {} = {}, gamma = {}", worst.0, worst.1, k.gamma)
        },
    });

    // (H1): |∇V| decays along the far radial grid.
    let profile: Vec<f64> = FAR_RADII
        .iter()
        .map(|&r| {
            dirs.iter()
                .map(|d| config.potential.gradient_unchecked(&(d * r)).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let decreasing = profile.windows(2).all(|w| w[1] <= w[0]);
    let decay = profile[3] / profile[0].max(f64::MIN_POSITIVE);
    let h1 = decreasing && profile.iter().all(|v| v.is_finite()) && (profile[0] == 0.0 || decay <= 1e-2);
    checks.push(HypothesisCheck {
        id: "H1",
        statement: "|grad V(q)| -> 0 as |q| -> inf",
        passed: h1,
        margin: 1e-2 - decay,
        sampled: true,
        detail: format!(
            "max |grad V| on |q| = 1e1..1e4: [{}]",
            profile.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    });

    // (H2) sign: q·∇V(q) < 0 on a quasi-random cloud.
    let cloud = Halton::new(3, seed ^ 0x5151);
    let (lo, hi) = (1e-3f64.ln(), 1e4f64.ln());
    let mut worst_sign = f64::NEG_INFINITY;
    let mut worst_q = Vector3::zeros();
    for i in 0..SIGN_CLOUD {
        let u = cloud.point(i);
        let r = (lo + (hi - lo) * u[0]).exp();
        let q = r * crate::sampling::sphere_point(u[1], u[2]);
        let s = q.dot(&config.potential.gradient_unchecked(&q));
        if !(s <= worst_sign) {
            worst_sign = s;
            worst_q = q;
        }
    }
    checks.push(HypothesisCheck {
        id: "H2-sign",
        statement: "q . grad V(q) < 0 for all q",
        passed: worst_sign < 0.0,
        margin: -worst_sign,
        sampled: true,
        detail: format!("largest q.gradV = {worst_sign:.3e} at |q| = {:.3e}", worst_q.norm()),
    });

    // (H2) near origin: q·∇V(q) ≤ −c₀|q|^(−γ) for |q| < ε₀.
    let near = |eps: f64| {
        if eps > 0.0 {
            log_radii(eps * 1e-6, eps * (1.0 - 1e-9), NEAR_RADII)
        } else {
            Vec::new()
        }
    };
    let mut margin = f64::INFINITY;
    for r in near(k.eps0) {
        let bound = k.c0 * r.powf(-k.gamma);
        for d in &dirs {
            let q = d * r;
            let s = q.dot(&config.potential.gradient_unchecked(&q));
            // relative margin of -s >= bound
            let m = (-s - bound * (1.0 - ROUND_OFF)) / bound;
            margin = margin.min(m);
        }
    }
    checks.push(HypothesisCheck {
        id: "H2-near",
        statement: "q . grad V <= -c0 |q|^-gamma on |q| < eps0",
        passed: margin >= 0.0,
        margin,
        sampled: true,
        detail: format!("relative margin over {NEAR_RADII} radii"),
    });

    // (H3): limsup |B| < C_B, sampled on the far shells.
    let mut far_b = 0.0f64;
    for &r in &FAR_RADII {
        for d in &dirs {
            for &t in &ts {
                far_b = far_b.max(config.magnetic.eval_unchecked(t, &(d * r)).norm());
            }
        }
    }
    checks.push(HypothesisCheck {
        id: "H3",
        statement: "limsup |B(t,q)| < C_B",
        passed: far_b < k.c_b,
        margin: k.c_b - far_b,
        sampled: true,
        detail: format!("max |B| on |q| = 1e1..1e4: {far_b:.3e}"),
    });

    // (H4): |B| ≤ c₁|q|^(−β−1) on |q| < ε₁.
    let mut margin = f64::INFINITY;
    for r in near(k.eps1) {
        let bound = k.c1 * r.powf(-k.beta - 1.0);
        for d in &dirs {
            for &t in &ts {
                let b = config.magnetic.eval_unchecked(t, &(d * r)).norm();
                margin = margin.min((bound * (1.0 + ROUND_OFF) - b) / bound);
            }
        }
    }
    checks.push(HypothesisCheck {
        id: "H4",
        statement: "|B| <= c1 |q|^(-beta-1) on |q| < eps1",
        passed: margin >= 0.0,
        margin,
        sampled: true,
        detail: format!("relative margin over {NEAR_RADII} radii"),
    });

    let beta_ok = k.beta > 0.0 && k.beta < k.gamma;
    checks.push(HypothesisCheck {
        id: "H4-beta",
        statement: "beta in (0, gamma)",
        passed: beta_ok,
        margin: k.beta.min(k.gamma - k.beta),
        sampled: false,
        detail: if beta_ok {
            String::new()
        } else {
            format!("β ∉ (0,γ): beta = {}, gamma = {}", k.beta, k.gamma)
        },
    });

    let hbar = config.mean_forcing().norm();
    checks.push(HypothesisCheck {
        id: "forcing",
        statement: "|mean(h)| > C_B",
        passed: hbar > k.c_b,
        margin: hbar - k.c_b,
        sampled: false,
        detail: format!("|mean(h)| = {hbar}, C_B = {}", k.c_b),
    });

    ValidationReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ElectricPotential, Forcing, HypothesisConstants};

    fn desk(gamma: f64, c_b: f64, hbar: f64) -> FieldConfig {
        FieldConfig {
            potential: ElectricPotential::GeneralizedCoulomb { c0: 1.0, gamma },
            magnetic: MagneticField::Dipole { moment: Vector3::new(0.0, 0.0, 0.1) },
            forcing: Forcing::constant(1.0, Vector3::new(0.0, 0.0, hbar)),
            constants: HypothesisConstants {
                c0: 1.0,
                gamma,
                eps0: 0.5,
                c_b,
                c1: 0.2,
                beta: 2.0,
                eps1: 0.5,
            },
        }
    }

    #[test]
    fn gamma_three_with_dipole_passes() {
        let report = validate_hypotheses(&desk(3.0, 1.0, 2.0));
        assert!(report.all_passed(), "{report}");
        assert!(report.checks.iter().any(|c| c.sampled));
    }

    #[test]
    fn coulomb_with_dipole_fails_beta() {
        let report = validate_hypotheses(&desk(1.0, 1.0, 2.0));
        let failed: Vec<_> = report.failures().map(|c| c.id).collect();
        assert_eq!(failed, vec!["H4-beta"], "{report}");
        assert!(report.check("H4-beta").unwrap().detail.contains("β ∉ (0,γ)"));
    }

    #[test]
    fn forcing_equal_to_c_b_fails() {
        let report = validate_hypotheses(&desk(3.0, 2.0, 2.0));
        assert!(!report.check("forcing").unwrap().passed);
        assert!(report.check("H3").unwrap().passed);
    }

    #[test]
    fn weak_near_origin_potential_fails_h2() {
        let mut cfg = desk(3.0, 1.0, 2.0);
        cfg.constants.c0 = 2.0;
        let report = validate_hypotheses(&cfg);
        assert!(!report.check("H2-near").unwrap().passed);
    }

    #[test]
    fn uniform_field_at_c_b_fails_h3() {
        let mut cfg = desk(3.0, 1.0, 2.0);
        cfg.magnetic = MagneticField::Uniform(Vector3::new(0.0, 1.0, 0.0));
        let report = validate_hypotheses(&cfg);
        assert!(!report.check("H3").unwrap().passed);
    }

    #[test]
    fn report_is_reproducible() {
        let a = validate_hypotheses_with_seed(&desk(3.0, 1.0, 2.0), 5);
        let b = validate_hypotheses_with_seed(&desk(3.0, 1.0, 2.0), 5);
        assert_eq!(format!("{a}"), format!("{b}"));
    }

    #[test]
    fn sup_dipole_beyond_unit_sphere() {
        let b = MagneticField::Dipole { moment: Vector3::new(0.0, 0.0, 0.1) };
        let sup = sup_field_beyond(&b, 1.0, 1.0, 1);
        assert!((sup - 0.2).abs() < 1e-15);
    }
}
