#![allow(dead_code)]

use lfe_core::fields::{ElectricPotential, FieldConfig, Forcing, HypothesisConstants, MagneticField};
use nalgebra::Vector3;

pub fn desk() -> FieldConfig {
    FieldConfig {
        potential: ElectricPotential::GeneralizedCoulomb { c0: 1.0, gamma: 3.0 },
        magnetic: MagneticField::Dipole { moment: Vector3::new(0.0, 0.0, 0.1) },
        forcing: Forcing::constant(1.0, Vector3::new(0.0, 0.0, 2.0)).with_harmonic(
            1,
            Vector3::new(0.1, 0.0, 0.0),
            Vector3::zeros(),
        ),
        constants: HypothesisConstants { c0: 1.0, gamma: 3.0, eps0: 0.5, c_b: 0.2, c1: 0.2, beta: 2.0, eps1: 0.5 },
    }
}

pub fn coulomb() -> FieldConfig {
    FieldConfig {
        potential: ElectricPotential::coulomb(1.0),
        magnetic: MagneticField::Zero,
        forcing: Forcing::constant(1.0, Vector3::new(0.0, 0.0, 2.0)),
        constants: HypothesisConstants { c0: 1.0, gamma: 1.0, eps0: 0.5, c_b: 1.0, c1: 0.1, beta: 0.5, eps1: 0.5 },
    }
}

/// Uniform `B = (0, 0, 1)`, no electric field, no forcing.
pub fn gyro() -> FieldConfig {
    FieldConfig {
        potential: ElectricPotential::zero(),
        magnetic: MagneticField::Uniform(Vector3::new(0.0, 0.0, 1.0)),
        forcing: Forcing::constant(1.0, Vector3::zeros()),
        constants: HypothesisConstants { c0: 1.0, gamma: 1.0, eps0: 0.5, c_b: 2.0, c1: 1.0, beta: 0.5, eps1: 0.5 },
    }
}

pub fn free() -> FieldConfig {
    FieldConfig { magnetic: MagneticField::Zero, ..gyro() }
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
