//! Adaptive Gauss–Kronrod (7, 15) quadrature for vector-valued integrands.

use nalgebra::SVector;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: usize = 48;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<const N: usize> {
    pub value: SVector<f64, N>,
    /// Sum of the Kronrod–Gauss differences over accepted panels.
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> (SVector<f64, N>, f64)
where
    F: Fn(f64) -> SVector<f64, N>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).amax())
}

/// Integrates `f` over `[a, b]` until the estimated error is below
/// `max(abs_tol, rel_tol · |∫f|)` (∞-norm), bisecting the worst panel.
pub fn integrate<const N: usize, F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Quadrature<N>
where
    F: Fn(f64) -> SVector<f64, N>,
{
    struct Panel<const N: usize> {
        a: f64,
        b: f64,
        value: SVector<f64, N>,
        error: f64,
        depth: usize,
    }

    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![Panel { a, b, value: v, error: e, depth: 0 }];
    let mut evaluations = 15;
    loop {
        let total: SVector<f64, N> = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let tol = abs_tol.max(rel_tol * total.amax());
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth < MAX_DEPTH)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        match worst {
            Some(i) if err > tol && evaluations < 200_000 => {
                let p = panels.swap_remove(i);
                let mid = 0.5 * (p.a + p.b);
                for (lo, hi) in [(p.a, mid), (mid, p.b)] {
                    let (value, error) = gk15(&f, lo, hi);
                    panels.push(Panel { a: lo, b: hi, value, error, depth: p.depth + 1 });
                }
                evaluations += 30;
            }
            _ => {
                return Quadrature { value: total, error: err, evaluations };
            }
        }
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    integrate(|t| SVector::<f64, 1>::new(f(t)), a, b, rel_tol, abs_tol).value[0]
}
