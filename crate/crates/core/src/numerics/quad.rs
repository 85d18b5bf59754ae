//! Quadrature: adaptive Gauss–Kronrod for complex integrands on panels, and
//! composite Simpson rules on uniform samples.

use num_complex::Complex64;

// Kronrod abscissae (non-negative half, descending) and weights, 15 points.
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
// Gauss weights for the 7-point rule living on XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7–K15 application on `[a, b]`: returns the Kronrod value and |K − G|.
pub fn gk15<F>(f: &mut F, a: f64, b: f64) -> (Complex64, f64)
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let fsum = f(center - dx) + f(center + dx);
        kron += fsum * WGK[j];
        if j % 2 == 1 {
            gauss += fsum * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).norm())
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol {
            abs: 1e-14,
            rel: 1e-12,
            max_depth: 48,
        }
    }
}

fn refine<F>(f: &mut F, a: f64, b: f64, whole: (Complex64, f64), tol: f64, depth: u32, q: &QuadTol) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    let (val, err) = whole;
    let eps_floor = 50.0 * f64::EPSILON * val.norm();
    if err <= tol.max(eps_floor) || depth >= q.max_depth || (b - a) <= 1e-15 * a.abs().max(b.abs()).max(1.0) {
        return val;
    }
    let mid = 0.5 * (a + b);
    let left = gk15(f, a, mid);
    let right = gk15(f, mid, b);
    refine(f, a, mid, left, 0.5 * tol, depth + 1, q) + refine(f, mid, b, right, 0.5 * tol, depth + 1, q)
}

/// Adaptive integral of `f` over consecutive panels `breaks[i]..breaks[i+1]`.
///
/// Break points should sit on any kink or near-singularity of the integrand.
pub fn integrate<F>(f: &mut F, breaks: &[f64], q: &QuadTol) -> Complex64
where
    F: FnMut(f64) -> Complex64,
{
    let panels: Vec<(f64, f64, (Complex64, f64))> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1], gk15(f, w[0], w[1])))
        .collect();
    let total: Complex64 = panels.iter().map(|p| p.2 .0).sum();
    let span = breaks.last().copied().unwrap_or(0.0) - breaks.first().copied().unwrap_or(0.0);
    let target = q.abs.max(q.rel * total.norm());
    panels
        .into_iter()
        .map(|(a, b, whole)| {
            let share = if span > 0.0 { target * (b - a) / span } else { target };
            // Panels are also allowed a share proportional to their count so
            // that tiny graded panels are not driven below round-off.
            refine(f, a, b, whole, share.max(target * 1e-3), 0, q)
        })
        .sum()
}

/// Composite Simpson rule on uniform samples (odd sample count preferred; an
/// even count closes with a 3-point end correction).
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        _ => {
            let c = cumulative_simpson(f, h);
            c[n - 1]
        }
    }
}

/// Running integral `I[i] = ∫_{x_0}^{x_i} f` on a uniform grid.
///
/// Even nodes use composite Simpson; odd nodes use the 3-point half-panel rule
/// clamped between their even neighbours, so the result is monotone whenever
/// `f ≥ 0`.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    let mut i = 0;
    while i + 2 < n {
        let pair = h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        let half = h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        let lo = out[i];
        let hi = out[i] + pair;
        out[i + 2] = hi;
        out[i + 1] = (lo + half).clamp(lo.min(hi), lo.max(hi));
        i += 2;
    }
    if i + 1 < n {
        // Trailing odd interval: half-panel rule on the last three samples.
        let half = h / 12.0 * (-f[n - 3] + 8.0 * f[n - 2] + 5.0 * f[n - 1]);
        out[n - 1] = out[n - 2] + half;
    }
    out
}
