//! Adaptive Dormand–Prince 5(4) integration of the homotopy system with
//! continuous (dense) output and a guard on `|q|`.

use std::io::{self, Write};

use crate::homotopy::HomotopySystem;
use crate::relativity::State;
use crate::{quadrature, Error, Result, Vector6};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
// Interior points checked by the singularity guard within each step.
const GUARD_PROBES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Singularity guard radius `r_min`.
    pub r_min: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 1_000_000, r_min: 1e-6 }
    }
}

impl IntegratorConfig {
    /// Default tolerances with the guard set to half the certified lower
    /// bound `m`.
    pub fn with_lower_bound(m: f64) -> Self {
        Self { r_min: 0.5 * m, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rtol > 0.0 && self.atol > 0.0 && self.r_min > 0.0 && self.max_steps > 0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("integrator config {self:?}")))
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    rcont: [Vector6; 5],
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    fn eval_theta(&self, theta: f64) -> Vector6 {
        let th1 = 1.0 - theta;
        let r = &self.rcont;
        r[0] + (r[1] + (r[2] + (r[3] + r[4] * th1) * theta) * th1) * theta
    }

    pub fn eval(&self, t: f64) -> Vector6 {
        self.eval_theta((t - self.t0) / self.h)
    }

    /// Straight-line segment between two nodes.
    fn linear(t0: f64, t1: f64, x0: Vector6, x1: Vector6) -> Self {
        let z = Vector6::zeros();
        Self { t0, h: t1 - t0, rcont: [x0, x1 - x0, z, z, z] }
    }
}

/// Integration result: nodes at accepted steps plus the dense interpolant.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub lambda: f64,
    times: Vec<f64>,
    states: Vec<Vector6>,
    segments: Vec<Segment>,
    pub rhs_evaluations: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    /// Piecewise-linear trajectory through the given nodes (for synthetic
    /// checks and imported data).
    pub fn from_nodes(lambda: f64, nodes: &[(f64, State)]) -> Result<Self> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument(
                "need at least two nodes with strictly increasing times".into(),
            ));
        }
        let times: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let states: Vec<Vector6> = nodes.iter().map(|n| n.1.to_vector()).collect();
        let segments = (1..nodes.len())
            .map(|i| Segment::linear(times[i - 1], times[i], states[i - 1], states[i]))
            .collect();
        Ok(Self { lambda, times, states, segments, rhs_evaluations: 0, rejected_steps: 0 })
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, State)> + '_ {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(t, x)| (*t, State::from_vector(x)))
    }

    pub fn initial_state(&self) -> State {
        State::from_vector(&self.states[0])
    }

    pub fn final_state(&self) -> State {
        State::from_vector(self.states.last().unwrap())
    }

    pub fn final_vector(&self) -> Vector6 {
        *self.states.last().unwrap()
    }

    /// Dense-output state at `t`; clamps to the covered interval.
    pub fn vector_at(&self, t: f64) -> Vector6 {
        let t = t.clamp(self.t0(), self.t1());
        let idx = match self.segments.binary_search_by(|s| s.t0.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let idx = idx.min(self.segments.len() - 1);
        self.segments[idx].eval(t)
    }

    pub fn state_at(&self, t: f64) -> State {
        State::from_vector(&self.vector_at(t))
    }

    /// Uniform grid of `n ≥ 2` samples on `[t0, t1]`.
    pub fn sample(&self, n: usize) -> Vec<(f64, State)> {
        let n = n.max(2);
        let (a, b) = (self.t0(), self.t1());
        (0..n)
            .map(|i| {
                let t = if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
                (t, self.state_at(t))
            })
            .collect()
    }

    /// `∫ g(t, x(t)) dt` over the trajectory, panel by panel on the dense
    /// output (adaptive Gauss–Kronrod, relative tolerance `rel_tol`).
    pub fn integrate<const N: usize, G>(&self, g: G, rel_tol: f64) -> nalgebra::SVector<f64, N>
    where
        G: Fn(f64, &Vector6) -> nalgebra::SVector<f64, N>,
    {
        self.segments
            .iter()
            .map(|s| {
                quadrature::integrate(|t| g(t, &s.eval(t)), s.t0, s.t1(), rel_tol, 1e-16 * s.h.abs())
                    .value
            })
            .sum()
    }

    /// CSV with header `t,q1,q2,q3,p1,p2,p3` on `n` uniform samples.
    pub fn write_csv<W: Write>(&self, out: W, n: usize) -> io::Result<()> {
        write_states_csv(out, &self.sample(n))
    }
}

/// Writes `(t, state)` rows with the trajectory CSV header.
pub fn write_states_csv<W: Write>(mut out: W, rows: &[(f64, State)]) -> io::Result<()> {
    writeln!(out, "t,q1,q2,q3,p1,p2,p3")?;
    for (t, s) in rows {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            t, s.q.x, s.q.y, s.q.z, s.p.x, s.p.y, s.p.z
        )?;
    }
    Ok(())
}

fn error_norm(err: &Vector6, y0: &Vector6, y1: &Vector6, cfg: &IntegratorConfig) -> f64 {
    let mut sum = 0.0;
    for i in 0..6 {
        let sc = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
        sum += (err[i] / sc).powi(2);
    }
    (sum / 6.0).sqrt()
}

fn initial_step<F>(f: &F, t0: f64, y0: &Vector6, f0: &Vector6, span: f64, cfg: &IntegratorConfig) -> f64
where
    F: Fn(f64, &Vector6) -> Vector6,
{
    let scale = |y: &Vector6| y.map(|v| cfg.atol + cfg.rtol * v.abs());
    let sc = scale(y0);
    let d0 = (y0.component_div(&sc).norm_squared() / 6.0).sqrt();
    let d1 = (f0.component_div(&sc).norm_squared() / 6.0).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = y0 + h0 * f0;
    let f1 = f(t0 + h0, &y1);
    let d2 = ((f1 - f0).component_div(&sc).norm_squared() / 6.0).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates the homotopy system at `lambda` over `[t0, t1]` from `x0`.
///
/// Deterministic for fixed inputs. Fails with
/// [`Error::SingularityApproach`] when `|q|` drops below `cfg.r_min` (the
/// crossing time is located by bisection on the dense output).
pub fn integrate(
    system: &HomotopySystem,
    x0: &State,
    t_span: (f64, f64),
    lambda: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda = {lambda} outside [0, 1]")));
    }
    let (t0, t1) = t_span;
    if !(t0 < t1) {
        return Err(Error::InvalidArgument(format!("empty time span ({t0}, {t1})")));
    }
    if !(x0.q.norm() > cfg.r_min) {
        return Err(Error::SingularityApproach { t: t0, radius: x0.q.norm(), state: *x0 });
    }
    let rhs = |t: f64, y: &Vector6| system.rhs_vector(t, y, lambda);

    let mut t = t0;
    let mut y = x0.to_vector();
    let mut k1 = rhs(t, &y);
    let mut evals = 1usize;
    let span = t1 - t0;
    let mut h = initial_step(&rhs, t, &y, &k1, span, cfg);
    evals += 1;

    let mut traj = Trajectory {
        lambda,
        times: vec![t],
        states: vec![y],
        segments: Vec::new(),
        rhs_evaluations: 0,
        rejected_steps: 0,
    };
    let mut rejected = 0usize;
    let mut last_rejected = false;
    let mut attempts = 0usize;

    while t < t1 {
        if attempts >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded { max_steps: cfg.max_steps, t });
        }
        attempts += 1;
        if h < 1e-14 * t.abs().max(span) {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= t1 || t1 - (t + h) < 1e-12 * span;
        if last {
            h = t1 - t;
        }

        let k2 = rhs(t + C2 * h, &(y + h * A21 * k1));
        let k3 = rhs(t + C3 * h, &(y + h * (A31 * k1 + A32 * k2)));
        let k4 = rhs(t + C4 * h, &(y + h * (A41 * k1 + A42 * k2 + A43 * k3)));
        let k5 = rhs(t + C5 * h, &(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)));
        let y6 = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5);
        let k6 = rhs(t + h, &y6);
        let y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
        let t_new = if last { t1 } else { t + h };
        let k7 = rhs(t_new, &y_new);
        evals += 6;

        let err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let err = error_norm(&err_vec, &y, &y_new, cfg);

        if !err.is_finite() {
            // a stage landed on or next to the singularity
            rejected += 1;
            last_rejected = true;
            h *= 0.25;
            continue;
        }

        let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
        if err > 1.0 {
            rejected += 1;
            last_rejected = true;
            h *= fac.min(1.0);
            continue;
        }

        let rc2 = y_new - y;
        let rc3 = h * k1 - rc2;
        let rc4 = rc2 - h * k7 - rc3;
        let rc5 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7);
        let seg = Segment { t0: t, h: t_new - t, rcont: [y, rc2, rc3, rc4, rc5] };

        guard(&seg, cfg.r_min)?;

        traj.segments.push(seg);
        traj.times.push(t_new);
        traj.states.push(y_new);
        t = t_new;
        y = y_new;
        k1 = k7;
        h *= if last_rejected { fac.min(1.0) } else { fac };
        last_rejected = false;
    }
    traj.rhs_evaluations = evals;
    traj.rejected_steps = rejected;
    Ok(traj)
}

fn guard(seg: &Segment, r_min: f64) -> Result<()> {
    let radius = |theta: f64| seg.eval_theta(theta).fixed_rows::<3>(0).norm();
    let probes: Vec<f64> = (0..=GUARD_PROBES).map(|i| radius(i as f64 / GUARD_PROBES as f64)).collect();
    let crossing = match probes.iter().position(|&r| r <= r_min) {
        Some(i) => Some(i as f64 / GUARD_PROBES as f64),
        None => {
            // a fast pass close to the origin can fall between probes
            let i = (1..GUARD_PROBES)
                .min_by(|&a, &b| probes[a].total_cmp(&probes[b]))
                .unwrap_or(0);
            let (mut a, mut b) = ((i as f64 - 1.0).max(0.0) / GUARD_PROBES as f64, (i as f64 + 1.0) / GUARD_PROBES as f64);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let (c, d) = (b - g * (b - a), a + g * (b - a));
                if radius(c) < radius(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let theta = 0.5 * (a + b);
            (radius(theta) <= r_min).then_some(theta)
        }
    };
    let Some(theta) = crossing else { return Ok(()) };
    let (mut lo, mut hi) = (0.0, theta);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if radius(mid) > r_min {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = seg.eval_theta(hi);
    Err(Error::SingularityApproach {
        t: seg.t0 + hi * seg.h,
        radius: x.fixed_rows::<3>(0).norm(),
        state: State::from_vector(&x),
    })
}

/// `max |Φ(t) − Φ(t₀)|` over the nodes, where
/// `Φ = √(1+|p|²) + V_λ(q) − h̄·q` is conserved when `h_λ` is constant.
pub fn energy_drift(system: &HomotopySystem, traj: &Trajectory) -> Result<f64> {
    let lambda = traj.lambda;
    if !system.is_autonomous_at(lambda) {
        return Err(Error::Misuse(format!(
            "energy is not conserved: h_lambda depends on time at lambda = {lambda}"
        )));
    }
    let h_bar = system.mean_forcing();
    let energy = |s: &State| -> Result<f64> {
        Ok((1.0 + s.p.norm_squared()).sqrt() + system.v_lambda(&s.q, lambda)? - h_bar.dot(&s.q))
    };
    let e0 = energy(&traj.initial_state())?;
    let mut drift = 0.0f64;
    for (_, s) in traj.nodes() {
        drift = drift.max((energy(&s)? - e0).abs());
    }
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{ElectricPotential, FieldConfig, Forcing, HypothesisConstants, MagneticField};
    use nalgebra::Vector3;

    fn system(potential: ElectricPotential, magnetic: MagneticField, forcing: Forcing, c0: f64) -> HomotopySystem {
        HomotopySystem::new(FieldConfig {
            potential,
            magnetic,
            forcing,
            constants: HypothesisConstants { c0, gamma: 1.0, eps0: 0.5, c_b: 1.0, c1: 0.1, beta: 0.5, eps1: 0.5 },
        })
    }

    fn free() -> HomotopySystem {
        system(ElectricPotential::zero(), MagneticField::Zero, Forcing::constant(1.0, Vector3::zeros()), 0.0)
    }

    fn coulomb_static() -> HomotopySystem {
        system(
            ElectricPotential::coulomb(1.0),
            MagneticField::Zero,
            Forcing::constant(1.0, Vector3::new(0.0, 0.0, 2.0)),
            1.0,
        )
    }

    #[test]
    fn free_particle_is_exact() {
        let sys = free();
        let x0 = State::new(Vector3::new(1.0, 2.0, -1.0), Vector3::new(0.3, -2.0, 0.5));
        let tr = integrate(&sys, &x0, (0.0, 1.0), 1.0, &IntegratorConfig::default()).unwrap();
        let v = x0.velocity();
        for (t, s) in tr.sample(101) {
            assert!((s.q - (x0.q + t * v)).amax() < 1e-12);
            assert!((s.p - x0.p).amax() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_stays_put() {
        let sys = coulomb_static();
        let x0 = State::new(Vector3::new(0.0, 0.0, -2f64.powf(-0.5)), Vector3::zeros());
        let tr = integrate(&sys, &x0, (0.0, 1.0), 0.0, &IntegratorConfig::default()).unwrap();
        for (_, s) in tr.nodes() {
            assert!((s.to_vector() - x0.to_vector()).amax() < 1e-10);
        }
        assert!(energy_drift(&sys, &tr).unwrap() < 1e-14);
    }

    #[test]
    fn nodes_increase_and_dense_output_matches_nodes() {
        let sys = coulomb_static();
        let x0 = State::new(Vector3::new(0.1, 0.0, -0.7), Vector3::new(0.0, 0.2, 0.0));
        let tr = integrate(&sys, &x0, (0.0, 1.0), 0.0, &IntegratorConfig::default()).unwrap();
        let nodes: Vec<_> = tr.nodes().collect();
        assert!(nodes.windows(2).all(|w| w[1].0 > w[0].0));
        assert_eq!(tr.t1(), 1.0);
        for (t, s) in &nodes {
            assert!((tr.state_at(*t).to_vector() - s.to_vector()).amax() < 1e-14);
        }
    }

    #[test]
    fn dense_output_is_accurate_between_nodes() {
        let sys = coulomb_static();
        let x0 = State::new(Vector3::new(0.1, 0.0, -0.7), Vector3::new(0.0, 0.2, 0.0));
        let cfg = IntegratorConfig::default();
        let tr = integrate(&sys, &x0, (0.0, 1.0), 0.0, &cfg).unwrap();
        for t in [0.123, 0.5, 0.777] {
            let direct = integrate(&sys, &x0, (0.0, t), 0.0, &cfg).unwrap().final_vector();
            assert!((tr.vector_at(t) - direct).amax() < 1e-9);
        }
    }

    #[test]
    fn singularity_guard_triggers() {
        let sys = free();
        let x0 = State::new(Vector3::new(-0.5, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0));
        let cfg = IntegratorConfig { r_min: 0.1, ..Default::default() };
        match integrate(&sys, &x0, (0.0, 2.0), 1.0, &cfg) {
            Err(Error::SingularityApproach { t, radius, .. }) => {
                // |q(t)| = 0.5 − t/√2 hits 0.1 at t = 0.4√2
                assert!((t - 0.4 * 2f64.sqrt()).abs() < 1e-9, "t = {t}");
                assert!((radius - 0.1).abs() < 1e-9);
            }
            other => panic!("expected guard, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let sys = free();
        let x0 = State::new(Vector3::new(1.0, 0.0, 0.0), Vector3::zeros());
        let cfg = IntegratorConfig::default();
        assert!(integrate(&sys, &x0, (1.0, 0.0), 1.0, &cfg).is_err());
        assert!(integrate(&sys, &x0, (0.0, 1.0), 1.5, &cfg).is_err());
        let bad = IntegratorConfig { rtol: 0.0, ..cfg };
        assert!(integrate(&sys, &x0, (0.0, 1.0), 1.0, &bad).is_err());
        let inside = State::new(Vector3::new(1e-7, 0.0, 0.0), Vector3::zeros());
        assert!(matches!(
            integrate(&sys, &inside, (0.0, 1.0), 1.0, &cfg),
            Err(Error::SingularityApproach { .. })
        ));
    }

    #[test]
    fn max_steps_exceeded() {
        let sys = coulomb_static();
        let x0 = State::new(Vector3::new(0.1, 0.0, -0.7), Vector3::new(0.0, 0.2, 0.0));
        let cfg = IntegratorConfig { max_steps: 3, ..Default::default() };
        assert!(matches!(
            integrate(&sys, &x0, (0.0, 1.0), 0.0, &cfg),
            Err(Error::MaxStepsExceeded { .. })
        ));
    }

    #[test]
    fn energy_drift_rejects_time_dependent_forcing() {
        let sys = system(
            ElectricPotential::coulomb(1.0),
            MagneticField::Zero,
            Forcing::constant(1.0, Vector3::new(0.0, 0.0, 2.0)).with_harmonic(
                1,
                Vector3::new(0.1, 0.0, 0.0),
                Vector3::zeros(),
            ),
            1.0,
        );
        let x0 = State::new(Vector3::new(0.0, 0.0, -0.7), Vector3::zeros());
        let tr = integrate(&sys, &x0, (0.0, 0.5), 0.5, &IntegratorConfig::default()).unwrap();
        assert!(matches!(energy_drift(&sys, &tr), Err(Error::Misuse(_))));
        let tr0 = integrate(&sys, &x0, (0.0, 0.5), 0.0, &IntegratorConfig::default()).unwrap();
        assert!(energy_drift(&sys, &tr0).is_ok());
    }

    #[test]
    fn time_reversal_on_conservative_problem() {
        // B = 0 and autonomous: (q, p) -> (q, -p) reverses time.
        let sys = coulomb_static();
        let x0 = State::new(Vector3::new(0.05, -0.02, -0.72), Vector3::new(0.01, 0.0, -0.03));
        let cfg = IntegratorConfig::default();
        let fwd = integrate(&sys, &x0, (0.0, 1.0), 0.0, &cfg).unwrap().final_state();
        let back = integrate(&sys, &State::new(fwd.q, -fwd.p), (0.0, 1.0), 0.0, &cfg)
            .unwrap()
            .final_state();
        let diff = (back.q - x0.q).amax().max((back.p + x0.p).amax());
        assert!(diff < 10.0 * cfg.rtol * 10.0, "diff {diff}");
    }

    #[test]
    fn csv_header_and_rows() {
        let sys = free();
        let x0 = State::new(Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.1, 0.0, 0.0));
        let tr = integrate(&sys, &x0, (0.0, 1.0), 1.0, &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf, 11).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,q1,q2,q3,p1,p2,p3");
        assert_eq!(lines.len(), 12);
        assert!(lines[11].starts_with("1e0,"));
    }

    #[test]
    fn synthetic_trajectory_interpolates_linearly() {
        let nodes = [
            (0.0, State::new(Vector3::new(1.0, 0.0, 0.0), Vector3::zeros())),
            (1.0, State::new(Vector3::new(3.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0))),
        ];
        let tr = Trajectory::from_nodes(0.0, &nodes).unwrap();
        let s = tr.state_at(0.25);
        assert!((s.q.x - 1.5).abs() < 1e-15 && (s.p.x - 0.25).abs() < 1e-15);
        assert!(Trajectory::from_nodes(0.0, &nodes[..1]).is_err());
    }
}
