//! Reproducible quasi-random sampling and sampled maximization over
//! spherical shells.
//!
//! Point sets are Halton sequences with a Cranley–Patterson shift drawn from
//! a seeded ChaCha generator, so every sampled constant is a deterministic
//! function of its seed.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    r
}

/// Shifted Halton point set in `[0, 1)^dim`.
#[derive(Debug, Clone)]
pub struct Halton {
    shift: Vec<f64>,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton dimension limited to {}", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        Self { shift }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// The `i`-th point (index 0 is skipped internally).
    pub fn point(&self, i: usize) -> Vec<f64> {
        self.shift
            .iter()
            .zip(PRIMES)
            .map(|(s, b)| (radical_inverse(i as u64 + 1, b) + s).fract())
            .collect()
    }
}

/// Maps `(u, w) ∈ [0,1)²` to a point on the unit sphere (area-preserving).
pub fn sphere_point(u: f64, w: f64) -> Vector3<f64> {
    let z = 2.0 * u - 1.0;
    let rho = (1.0 - z * z).max(0.0).sqrt();
    let phi = std::f64::consts::TAU * w;
    Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// `n` quasi-random unit directions plus the six coordinate axes.
pub fn directions(n: usize, seed: u64) -> Vec<Vector3<f64>> {
    let halton = Halton::new(2, seed);
    let mut out: Vec<Vector3<f64>> = (0..n)
        .map(|i| {
            let u = halton.point(i);
            sphere_point(u[0], u[1])
        })
        .collect();
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut e = Vector3::zeros();
            e[axis] = sign;
            out.push(e);
        }
    }
    out
}

/// `n` log-uniformly spaced radii from `lo` to `hi` inclusive.
pub fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Where and how a sampled maximum was found.
#[derive(Debug, Clone, Serialize)]
pub struct SampledMax {
    pub value: f64,
    pub t: f64,
    pub q: Vector3<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// Shell `inner ≤ |q| ≤ outer` crossed with a time window `[0, period]`.
#[derive(Debug, Clone, Copy)]
pub struct ShellDomain {
    pub inner: f64,
    pub outer: f64,
    pub period: f64,
}

// Coordinates (log r, cos θ, φ, t) with box bounds; φ wraps.
#[derive(Clone, Copy)]
struct Coords([f64; 4]);

impl ShellDomain {
    fn lower(&self) -> [f64; 4] {
        [self.inner.ln(), -1.0, 0.0, 0.0]
    }

    fn upper(&self) -> [f64; 4] {
        [self.outer.ln(), 1.0, std::f64::consts::TAU, self.period]
    }

    fn clamp(&self, mut c: Coords) -> Coords {
        let (lo, hi) = (self.lower(), self.upper());
        for k in [0, 1, 3] {
            c.0[k] = c.0[k].clamp(lo[k], hi[k]);
        }
        c.0[2] = c.0[2].rem_euclid(hi[2]);
        c
    }

    fn point_at(&self, c: Coords) -> (f64, Vector3<f64>) {
        let r = c.0[0].exp().clamp(self.inner, self.outer);
        let z = c.0[1];
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let q = r * Vector3::new(rho * c.0[2].cos(), rho * c.0[2].sin(), z);
        (c.0[3], q)
    }
}

/// Sampled maximum of `f(t, q)` over a shell domain: `samples` Halton points
/// (log-uniform in radius), the two boundary spheres along the coordinate
/// axes, then compass-search ascent from the best `restarts` candidates.
///
/// Candidate evaluation runs in parallel; the reduction is by index so the
/// result does not depend on scheduling.
pub fn maximize_on_shell<F>(
    f: F,
    domain: ShellDomain,
    samples: usize,
    restarts: usize,
    seed: u64,
) -> SampledMax
where
    F: Fn(f64, &Vector3<f64>) -> f64 + Sync,
{
    let halton = Halton::new(4, seed);
    let (lo, hi) = (domain.lower(), domain.upper());
    let mut coords: Vec<Coords> = (0..samples)
        .map(|i| {
            let u = halton.point(i);
            Coords([
                lo[0] + (hi[0] - lo[0]) * u[0],
                2.0 * u[1] - 1.0,
                hi[2] * u[2],
                hi[3] * u[3],
            ])
        })
        .collect();
    for log_r in [lo[0], hi[0]] {
        for (z, ph) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.0, 1.5)] {
            coords.push(Coords([log_r, z, ph * std::f64::consts::PI, 0.0]));
        }
    }

    let eval = |c: Coords| {
        let (t, q) = domain.point_at(c);
        let v = f(t, &q);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let values: Vec<f64> = coords.par_iter().map(|&c| eval(c)).collect();
    let mut order: Vec<usize> = (0..coords.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let refined: Vec<(f64, Coords)> = order
        .iter()
        .take(restarts.max(1))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&i| compass_ascent(&eval, &domain, coords[i], values[i]))
        .collect();

    let (mut best_v, mut best_c) = (values[order[0]], coords[order[0]]);
    for (v, c) in refined {
        if v > best_v {
            best_v = v;
            best_c = c;
        }
    }
    let (t, q) = domain.point_at(best_c);
    SampledMax {
        value: best_v,
        t,
        q,
        samples: coords.len(),
        seed,
    }
}

fn compass_ascent<E>(eval: &E, domain: &ShellDomain, start: Coords, start_value: f64) -> (f64, Coords)
where
    E: Fn(Coords) -> f64,
{
    let (lo, hi) = (domain.lower(), domain.upper());
    let mut step: [f64; 4] = std::array::from_fn(|k| 0.05 * (hi[k] - lo[k]).max(1e-300));
    let mut best = (start_value, start);
    for _ in 0..400 {
        let mut improved = false;
        #[allow(clippy::needless_range_loop)]
        for k in 0..4 {
            if step[k] == 0.0 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let mut c = best.1;
                c.0[k] += sign * step[k];
                let c = domain.clamp(c);
                let v = eval(c);
                if v > best.0 {
                    best = (v, c);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            let mut done = true;
            for k in 0..4 {
                step[k] *= 0.5;
                if step[k] > 1e-13 * (hi[k] - lo[k]).abs().max(1.0) {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
    }
    best
}
