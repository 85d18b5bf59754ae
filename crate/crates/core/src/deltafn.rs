//! The scalar conjugation factor δ(λ) = exp(i∫ν(s)/(s−λ) ds) over the rays
//! (−∞, −λ₀] ∪ [λ₀, ∞), its density ν = −ln(1+|r|²)/2π, the Taylor
//! coefficient δ₁ at λ = 0, and the endpoint data δ₀, β at ±λ₀.

use num_complex::Complex64;

use crate::error::{EbError, Result};
use crate::numerics::quad::{integrate, QuadTol};
use crate::numerics::spline::CubicSpline;
use crate::scattering::ScatteringData;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Rays are cut where |ν| drops below this.
pub const NU_CUTOFF: f64 = 1e-12;
pub const DEFAULT_GRADING: f64 = 0.8;
pub const DEFAULT_CONTOUR_EPS: f64 = 1e-9;

/// Splines of the sweep: ln(1+|r|²) on each half line (as a function of |s|),
/// r itself and its unwrapped argument on the positive half.
#[derive(Debug, Clone)]
pub struct ReflectionSplines {
    log_plus: Option<CubicSpline>,
    log_minus: Option<CubicSpline>,
    r_re: Option<CubicSpline>,
    r_im: Option<CubicSpline>,
    arg: Option<CubicSpline>,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    trivial: bool,
}

fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(phases.len());
    let mut shift = 0.0;
    for (k, &p) in phases.iter().enumerate() {
        if k > 0 {
            let d: f64 = p + shift - out[k - 1];
            shift -= TWO_PI * (d / TWO_PI).round();
        }
        out.push(p + shift);
    }
    out
}

impl ReflectionSplines {
    pub fn new(sd: &ScatteringData) -> Result<Self> {
        let pos = sd.positive_range();
        let neg = sd.negative_range();
        if pos.len() < 4 {
            return Err(EbError::BadParams("scattering data needs at least 4 positive nodes".into()));
        }
        let xs: Vec<f64> = sd.lambdas[pos.clone()].to_vec();
        let rs: Vec<Complex64> = sd.r[pos].to_vec();
        let logs: Vec<f64> = rs.iter().map(|r| r.norm_sqr().ln_1p()).collect();
        let trivial = sd.is_trivial();
        let log_minus = if neg.len() >= 4 {
            let mut k: Vec<(f64, f64)> = neg.map(|i| (-sd.lambdas[i], sd.r[i].norm_sqr().ln_1p())).collect();
            k.reverse();
            let (kx, ky): (Vec<f64>, Vec<f64>) = k.into_iter().unzip();
            Some(CubicSpline::new(&kx, &ky))
        } else {
            // By r(−λ) = conj r(λ) the weight is even.
            Some(CubicSpline::new(&xs, &logs))
        };
        let arg = unwrap(&rs.iter().map(|r| r.arg()).collect::<Vec<_>>());
        Ok(ReflectionSplines {
            log_plus: Some(CubicSpline::new(&xs, &logs)),
            log_minus,
            r_re: Some(CubicSpline::new(&xs, &rs.iter().map(|r| r.re).collect::<Vec<_>>())),
            r_im: Some(CubicSpline::new(&xs, &rs.iter().map(|r| r.im).collect::<Vec<_>>())),
            arg: Some(CubicSpline::new(&xs, &arg)),
            lambda_lo: xs[0],
            lambda_hi: *xs.last().unwrap(),
            trivial,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    fn log_weight(&self, s: f64) -> f64 {
        if self.trivial {
            return 0.0;
        }
        let sp = if s >= 0.0 { &self.log_plus } else { &self.log_minus };
        sp.as_ref().map_or(0.0, |sp| sp.eval(s.abs()).max(0.0))
    }

    fn log_weight_slope(&self, s: f64) -> f64 {
        if self.trivial {
            return 0.0;
        }
        match (s >= 0.0, &self.log_plus, &self.log_minus) {
            (true, Some(sp), _) => sp.deriv(s),
            (false, _, Some(sp)) => -sp.deriv(-s),
            _ => 0.0,
        }
    }

    /// ν(s) = −ln(1+|r(s)|²)/2π from the interpolated sweep.
    pub fn nu(&self, s: f64) -> f64 {
        -self.log_weight(s) / TWO_PI
    }

    pub fn nu_prime(&self, s: f64) -> f64 {
        -self.log_weight_slope(s) / TWO_PI
    }

    /// r(λ) for λ > 0, interpolated.
    pub fn r(&self, lambda: f64) -> Complex64 {
        if self.trivial {
            return Complex64::new(0.0, 0.0);
        }
        let re = self.r_re.as_ref().map_or(0.0, |s| s.eval(lambda));
        let im = self.r_im.as_ref().map_or(0.0, |s| s.eval(lambda));
        Complex64::new(re, im)
    }

    /// Continuous arg r(λ), λ > 0.
    pub fn arg_r(&self, lambda: f64) -> f64 {
        self.arg.as_ref().map_or(0.0, |s| s.eval(lambda))
    }

    fn knots_plus(&self) -> &[f64] {
        self.log_plus.as_ref().map_or(&[], |s| s.knots())
    }

    /// Last |s| at which either half still carries |ν| ≥ cutoff.
    fn support_end(&self) -> f64 {
        let mut end: f64 = 0.0;
        for sp in [&self.log_plus, &self.log_minus].into_iter().flatten() {
            let k = sp.knots();
            let v = sp.values();
            if let Some(i) = (0..k.len()).rev().find(|&i| v[i] / TWO_PI >= NU_CUTOFF) {
                end = end.max(k[(i + 1).min(k.len() - 1)]);
            }
        }
        end
    }
}

/// ν tabulated on a graded mesh on both rays, with the interpolant kept for
/// off-node evaluation. `s` runs over the left ray then the right ray.
#[derive(Debug, Clone)]
pub struct NuTable {
    pub lambda0: f64,
    /// Truncation point: rays are [λ₀, s_end] and [−s_end, −λ₀].
    pub s_end: f64,
    pub s: Vec<f64>,
    pub nu: Vec<f64>,
    pub nu_prime: Vec<f64>,
    right_mesh: Vec<f64>,
    rs: ReflectionSplines,
}

pub fn nu_table(sd: &ScatteringData, lambda0: f64) -> Result<NuTable> {
    NuTable::new(ReflectionSplines::new(sd)?, lambda0, DEFAULT_GRADING)
}

impl NuTable {
    /// `grading` is the geometric ratio of successive distances to λ₀.
    pub fn new(rs: ReflectionSplines, lambda0: f64, grading: f64) -> Result<Self> {
        let s_end = rs.support_end().max(lambda0 + 1.0);
        if !(lambda0 > 0.0) || lambda0 < rs.lambda_lo || s_end > rs.lambda_hi {
            return Err(EbError::RangeTooNarrow {
                lo: rs.lambda_lo,
                hi: rs.lambda_hi,
                need_lo: lambda0,
                need_hi: s_end,
            });
        }
        let span = s_end - lambda0;
        let mut mesh: Vec<f64> = vec![lambda0, s_end];
        let mut d = span;
        while d > 1e-12 * span.max(1.0) {
            d *= grading;
            mesh.push(lambda0 + d);
        }
        // Refine the coarse end so spacing never exceeds the knot spacing.
        mesh.extend(rs.knots_plus().iter().copied().filter(|k| *k > lambda0 && *k < s_end));
        mesh.sort_by(|a, b| a.total_cmp(b));
        mesh.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
        let s: Vec<f64> = mesh.iter().rev().map(|v| -v).chain(mesh.iter().copied()).collect();
        let nu = s.iter().map(|&v| rs.nu(v)).collect();
        let nu_prime = s.iter().map(|&v| rs.nu_prime(v)).collect();
        Ok(NuTable {
            lambda0,
            s_end,
            s,
            nu,
            nu_prime,
            right_mesh: mesh,
            rs,
        })
    }

    pub fn splines(&self) -> &ReflectionSplines {
        &self.rs
    }

    pub fn nu_at(&self, s: f64) -> f64 {
        if s.abs() < self.lambda0 || s.abs() > self.s_end {
            0.0
        } else {
            self.rs.nu(s)
        }
    }

    pub fn nu_prime_at(&self, s: f64) -> f64 {
        if s.abs() < self.lambda0 || s.abs() > self.s_end {
            0.0
        } else {
            self.rs.nu_prime(s)
        }
    }

    /// Mesh points inside [a, b] (either ray), plus the ends.
    fn breaks(&self, a: f64, b: f64, extra: Option<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = vec![a, b];
        let (lo, hi) = if a >= 0.0 { (a, b) } else { (-b, -a) };
        let sgn = if a >= 0.0 { 1.0 } else { -1.0 };
        v.extend(self.right_mesh.iter().filter(|m| **m > lo && **m < hi).map(|m| sgn * m));
        if let Some(e) = extra {
            if e > a && e < b {
                v.push(e);
            }
        }
        v.sort_by(|x, y| x.total_cmp(y));
        v.dedup();
        v
    }

    /// ∫_a^b g(s)/(s−λ) ds with the value at the nearest point subtracted and
    /// integrated exactly. `g` must be smooth on [a, b].
    fn cauchy_segment(&self, g: &dyn Fn(f64) -> f64, a: f64, b: f64, lambda: Complex64, eps: f64) -> Result<Complex64> {
        let star = lambda.re.clamp(a, b);
        let gs = g(star);
        let dist = Complex64::new(lambda.re - star, lambda.im).norm();
        let interior = star > a && star < b;
        if dist < eps && gs != 0.0 && (interior || dist == 0.0) {
            return Err(EbError::OnContour { lambda_re: lambda.re, lambda_im: lambda.im });
        }
        let mut f = |s: f64| {
            let d = Complex64::new(s, 0.0) - lambda;
            if d.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (g(s) - gs) / d
            }
        };
        let mut val = integrate(&mut f, &self.breaks(a, b, Some(star)), &QuadTol::default());
        if gs != 0.0 {
            let end_b = Complex64::new(b, 0.0) - lambda;
            let end_a = Complex64::new(a, 0.0) - lambda;
            val += gs * (end_b.ln() - end_a.ln());
        }
        Ok(val)
    }

    /// ∫_{rays} ν(s)/(s−λ) ds.
    pub fn cauchy_nu(&self, lambda: Complex64, eps: f64) -> Result<Complex64> {
        let nu = |s: f64| self.rs.nu(s);
        let l0 = self.lambda0;
        Ok(self.cauchy_segment(&nu, l0, self.s_end, lambda, eps)?
            + self.cauchy_segment(&nu, -self.s_end, -l0, lambda, eps)?)
    }

    /// ∫_{rays} ν ds (both rays).
    pub fn integral_nu(&self) -> f64 {
        let mut f = |s: f64| Complex64::from(self.rs.nu(s));
        let l0 = self.lambda0;
        (integrate(&mut f, &self.breaks(l0, self.s_end, None), &QuadTol::default())
            + integrate(&mut f, &self.breaks(-self.s_end, -l0, None), &QuadTol::default()))
        .re
    }
}

/// δ(λ) for λ off the rays.
pub fn delta_eval(nt: &NuTable, lambda: Complex64) -> Result<Complex64> {
    delta_eval_eps(nt, lambda, DEFAULT_CONTOUR_EPS)
}

pub fn delta_eval_eps(nt: &NuTable, lambda: Complex64, contour_eps: f64) -> Result<Complex64> {
    if nt.rs.is_trivial() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok((Complex64::i() * nt.cauchy_nu(lambda, contour_eps)?).exp())
}

/// δ₁ = 2i ∫_{λ₀}^∞ ν(s)/s² ds.
pub fn delta1(nt: &NuTable, lambda0: f64) -> Complex64 {
    let mut f = |s: f64| Complex64::from(nt.nu_at(s) / (s * s));
    let v = integrate(&mut f, &nt.breaks(lambda0, nt.s_end, None), &QuadTol::default());
    Complex64::new(0.0, 2.0 * v.re)
}

/// δ₀(±λ₀) and β(·, ±λ₀). With σ = ±1:
///   σ = +1: δ(λ) = e^{iβ(λ)} (λ₀ − λ)^{−iν₀},  β = ν₀ Log(λ₀+1−λ) + ∫(ν − χ₊ν₀)/(s−λ)
///   σ = −1: δ(λ) = e^{iβ(λ)} (λ + λ₀)^{iν₀},   β = −ν₀ Log(λ+λ₀+1) + ∫(ν − χ₋ν₀)/(s−λ)
/// where χ± is the indicator of the unit interval of the ray next to ±λ₀.
#[derive(Debug, Clone)]
pub struct EndpointData<'a> {
    pub sign: i8,
    pub nu0: f64,
    pub delta0: Complex64,
    table: &'a NuTable,
}

impl EndpointData<'_> {
    pub fn beta(&self, lambda: Complex64) -> Result<Complex64> {
        let nt = self.table;
        let l0 = nt.lambda0;
        let nu0 = self.nu0;
        let nu = |s: f64| nt.rs.nu(s);
        let nu_minus_const = |s: f64| nt.rs.nu(s) - nu0;
        let eps = DEFAULT_CONTOUR_EPS;
        let one = Complex64::new(1.0, 0.0);
        if self.sign > 0 {
            let log = nu0 * (Complex64::from(l0) + one - lambda).ln();
            Ok(log
                + nt.cauchy_segment(&nu_minus_const, l0, l0 + 1.0, lambda, eps)?
                + nt.cauchy_segment(&nu, l0 + 1.0, nt.s_end, lambda, eps)?
                + nt.cauchy_segment(&nu, -nt.s_end, -l0, lambda, eps)?)
        } else {
            let log = -nu0 * (lambda + l0 + 1.0).ln();
            Ok(log
                + nt.cauchy_segment(&nu_minus_const, -l0 - 1.0, -l0, lambda, eps)?
                + nt.cauchy_segment(&nu, -nt.s_end, -l0 - 1.0, lambda, eps)?
                + nt.cauchy_segment(&nu, l0, nt.s_end, lambda, eps)?)
        }
    }

    /// The local power factor (λ₀−λ)^{−iν₀} or (λ+λ₀)^{iν₀}.
    pub fn power(&self, lambda: Complex64) -> Complex64 {
        let l0 = self.table.lambda0;
        if self.sign > 0 {
            ((Complex64::from(l0) - lambda).ln() * Complex64::new(0.0, -self.nu0)).exp()
        } else {
            ((lambda + l0).ln() * Complex64::new(0.0, self.nu0)).exp()
        }
    }
}

pub fn endpoint_data(nt: &NuTable, lambda0: f64, sign: i8) -> Result<EndpointData<'_>> {
    let sgn = if sign >= 0 { 1i8 } else { -1 };
    let nu0 = nt.nu_at(sgn as f64 * lambda0);
    let mut ed = EndpointData {
        sign: sgn,
        nu0,
        delta0: Complex64::new(1.0, 0.0),
        table: nt,
    };
    if !nt.rs.is_trivial() {
        let b = ed.beta(Complex64::from(sgn as f64 * lambda0))?;
        ed.delta0 = (Complex64::i() * b).exp();
    }
    Ok(ed)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Synthetic even data with |r|² = e^{−(s/σ)²}·c.
    pub(crate) fn synthetic(c: f64) -> ScatteringData {
        let pos = crate::scattering::positive_nodes(16.0, 240);
        let lam: Vec<f64> = pos.iter().rev().map(|l| -l).chain(pos.iter().copied()).collect();
        let r: Vec<Complex64> = lam
            .iter()
            .map(|l| {
                let m = (c * (-(l / 0.8f64).powi(2)).exp()).sqrt();
                Complex64::from_polar(m, 0.3 * l)
            })
            .collect();
        let a: Vec<Complex64> = r.iter().map(|r| Complex64::from(1.0 / (1.0 + r.norm_sqr()).sqrt())).collect();
        let b = r.iter().zip(&a).map(|(r, a)| r * a).collect();
        ScatteringData { lambdas: lam, a, b, r, min_abs_a: 0.5, max_unitarity_defect: 0.0 }
    }

    #[test]
    fn trivial_data() {
        let sd = ScatteringData::trivial(crate::scattering::spectral_grid(16.0, 60));
        let nt = nu_table(&sd, 0.5).unwrap();
        assert!(nt.nu.iter().all(|v| *v == 0.0));
        assert_eq!(delta_eval(&nt, Complex64::new(0.3, 0.4)).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(delta1(&nt, 0.5), Complex64::new(0.0, 0.0));
        let ed = endpoint_data(&nt, 0.5, 1).unwrap();
        assert_eq!(ed.delta0, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn nu_definition_and_sign() {
        let sd = synthetic(0.5);
        let nt = nu_table(&sd, 0.4).unwrap();
        assert!(nt.nu.iter().all(|v| *v <= 0.0));
        // At sweep nodes the table is the definition.
        let rs = nt.splines();
        for k in sd.positive_range().step_by(17) {
            let l = sd.lambdas[k];
            assert!((rs.nu(l) + sd.r[k].norm_sqr().ln_1p() / TWO_PI).abs() < 1e-15);
        }
        let v = -((std::f64::consts::TAU).exp() - 1.0).ln_1p() / TWO_PI;
        assert!((v + 1.0).abs() < 1e-14);
    }

    #[test]
    fn reflection_through_axis_and_gap_modulus() {
        let sd = synthetic(0.5);
        let nt = nu_table(&sd, 0.4).unwrap();
        for z in [Complex64::new(0.9, 0.3), Complex64::new(-0.2, 0.05), Complex64::new(2.0, 1.0)] {
            let up = delta_eval(&nt, z).unwrap();
            let down = delta_eval(&nt, z.conj()).unwrap();
            assert!((down - 1.0 / up.conj()).norm() < 1e-8);
        }
        for x in [-0.3, 0.0, 0.25] {
            let d = delta_eval(&nt, Complex64::from(x)).unwrap();
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(delta_eval(&nt, Complex64::from(0.9)), Err(EbError::OnContour { .. })));
    }

    #[test]
    fn delta1_is_imaginary_and_matches_taylor() {
        let sd = synthetic(0.5);
        let nt = nu_table(&sd, 0.4).unwrap();
        let d1 = delta1(&nt, 0.4);
        assert!(d1.re.abs() < 1e-12);
        let h = 1e-4;
        let fd = (delta_eval(&nt, Complex64::from(h)).unwrap() - delta_eval(&nt, Complex64::from(-h)).unwrap()) / (2.0 * h);
        assert!((fd - d1).norm() < 1e-5, "{fd} vs {d1}");
    }

    #[test]
    fn endpoint_factorisation_is_consistent() {
        let sd = synthetic(0.5);
        let nt = nu_table(&sd, 0.4).unwrap();
        for sign in [1i8, -1] {
            let ed = endpoint_data(&nt, 0.4, sign).unwrap();
            assert!((ed.delta0.norm() - 1.0).abs() < 1e-8);
            let z = Complex64::new(sign as f64 * 0.4 + 0.05, 0.07);
            let direct = delta_eval(&nt, z).unwrap();
            let split = (Complex64::i() * ed.beta(z).unwrap()).exp() * ed.power(z);
            assert!((direct - split).norm() < 1e-10, "sign {sign}");
        }
    }
}
