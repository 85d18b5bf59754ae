//! Forward scattering at t = 0: Jost solutions μ± of
//! μ_x = iλ√m [σ₃, μ] + U μ,  U = [[0, w], [−w, 0]],  w = q_xx / (2m),
//! the scattering coefficients a, b and the reflection coefficient r = b/a.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EbError, Result};
use crate::numerics::interp::uniform_weights;
use crate::numerics::mat2::Mat2;
use crate::numerics::ode::{Controller, Integrator};
use crate::profile::{charges, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
pub struct JostSolution {
    pub lambda: Complex64,
    pub side: Side,
    /// μ at every grid node.
    pub values: Vec<Mat2>,
    pub p_of_x: Vec<f64>,
}

/// Rotation G(x) by φ = ½·atan(q_x); G_x = U G, so G is the λ = 0 Jost matrix.
#[derive(Debug, Clone)]
pub struct GaugeMatrix {
    pub values: Vec<[[f64; 2]; 2]>,
}

impl GaugeMatrix {
    pub fn from_profile(p: &Profile) -> Self {
        let values = p
            .q_x
            .iter()
            .map(|d| {
                let phi = 0.5 * d.atan();
                let (s, c) = phi.sin_cos();
                [[c, s], [-s, c]]
            })
            .collect();
        GaugeMatrix { values }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JostOptions {
    pub tol: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        JostOptions { tol: 1e-10 }
    }
}

/// Coefficients √m and w sampled on the grid, plus the phase p = x − c₊(x).
#[derive(Debug, Clone)]
pub struct JostSystem<'a> {
    profile: &'a Profile,
    s: Vec<f64>,
    w: Vec<f64>,
    s_max: f64,
    pub p_of_x: Vec<f64>,
    opts: JostOptions,
}

impl<'a> JostSystem<'a> {
    pub fn new(profile: &'a Profile, opts: JostOptions) -> Self {
        let s: Vec<f64> = profile.m.iter().map(|m| m.sqrt()).collect();
        let w = profile
            .q_xx
            .iter()
            .zip(&profile.m)
            .map(|(qxx, m)| qxx / (2.0 * m))
            .collect();
        let ch = charges(profile);
        let p_of_x = (0..profile.grid.n)
            .map(|i| profile.grid.x(i) - ch.c_plus_of_x[i])
            .collect();
        let s_max = s.iter().cloned().fold(1.0, f64::max);
        JostSystem { profile, s, w, s_max, p_of_x, opts }
    }

    pub fn profile(&self) -> &Profile {
        self.profile
    }

    fn coeffs(&self, x: f64) -> (f64, f64) {
        let g = &self.profile.grid;
        let (start, wt) = uniform_weights(g.x_min, g.spacing(), g.n, x);
        let mut s = 0.0;
        let mut w = 0.0;
        for (j, c) in wt.iter().enumerate() {
            s += c * self.s[start + j];
            w += c * self.w[start + j];
        }
        (s, w)
    }

    fn rhs(&self, lambda: Complex64, x: f64, mu: &Mat2) -> Mat2 {
        let (s, w) = self.coeffs(x);
        let ph = Complex64::new(0.0, 2.0) * lambda * s;
        let m = &mu.0;
        Mat2([
            [m[1][0] * w, ph * m[0][1] + m[1][1] * w],
            [-ph * m[1][0] - m[0][0] * w, -m[0][1] * w],
        ])
    }

    /// Integrate from the side's boundary node to `stop` (inclusive); entries
    /// on the far side of `stop` are left as identity.
    pub fn integrate(&self, lambda: Complex64, side: Side, stop: usize) -> Result<Vec<Mat2>> {
        let g = &self.profile.grid;
        let n = g.n;
        let mut values = vec![Mat2::identity(); n];
        let h_max = 0.2 / (1.0 + lambda.norm() * self.s_max);
        let ctl = Controller::new(self.opts.tol, self.opts.tol).with_h_max(h_max);
        let mut integ = Integrator::new(ctl, h_max);
        let mut f = |x: f64, mu: &Mat2| self.rhs(lambda, x, mu);
        let mut mu = Mat2::identity();
        let order: Box<dyn Iterator<Item = usize>> = match side {
            Side::Plus => Box::new((stop..n - 1).rev()),
            Side::Minus => Box::new(1..=stop),
        };
        let mut x = match side {
            Side::Plus => g.x(n - 1),
            Side::Minus => g.x(0),
        };
        for i in order {
            let xi = g.x(i);
            mu = integ
                .advance(&mut f, x, mu, xi)
                .map_err(|e| EbError::NonConvergence { lambda: lambda.re, source: e })?;
            values[i] = mu;
            x = xi;
        }
        Ok(values)
    }

    pub fn jost(&self, lambda: Complex64, side: Side) -> Result<JostSolution> {
        let n = self.profile.grid.n;
        let stop = match side {
            Side::Plus => 0,
            Side::Minus => n - 1,
        };
        Ok(JostSolution {
            lambda,
            side,
            values: self.integrate(lambda, side, stop)?,
            p_of_x: self.p_of_x.clone(),
        })
    }

    /// (a, b) from μ± matched at grid node `idx`.
    pub fn scattering_at_node(&self, lambda: f64, idx: usize) -> Result<(Complex64, Complex64)> {
        let l = Complex64::from(lambda);
        let plus = self.integrate(l, Side::Plus, idx)?[idx];
        let minus = self.integrate(l, Side::Minus, idx)?[idx];
        Ok(coefficients(&plus, &minus, lambda, self.p_of_x[idx]))
    }
}

/// a = det(μ₊ col 1, μ₋ col 2); b = e^{−2iλp}·det(μ₋ col 2, μ₊ col 2).
pub fn coefficients(plus: &Mat2, minus: &Mat2, lambda: f64, p: f64) -> (Complex64, Complex64) {
    let (u, v) = (&plus.0, &minus.0);
    let a = u[0][0] * v[1][1] - u[1][0] * v[0][1];
    let b = (v[0][1] * u[1][1] - u[0][1] * v[1][1]) * Complex64::from_polar(1.0, -2.0 * lambda * p);
    (a, b)
}

pub fn jost(p: &Profile, lambda: Complex64, side: Side) -> Result<JostSolution> {
    JostSystem::new(p, JostOptions::default()).jost(lambda, side)
}

/// Match point used by [`scattering_at`]: the node nearest x = 0.
pub fn default_match_index(p: &Profile) -> usize {
    p.grid.nearest(0.0)
}

pub fn scattering_at(p: &Profile, lambda: f64) -> Result<(Complex64, Complex64)> {
    JostSystem::new(p, JostOptions::default()).scattering_at_node(lambda, default_match_index(p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub lambdas: Vec<f64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub r: Vec<Complex64>,
    pub min_abs_a: f64,
    pub max_unitarity_defect: f64,
}

impl ScatteringData {
    /// Identically zero data on the given nodes.
    pub fn trivial(lambdas: Vec<f64>) -> Self {
        let n = lambdas.len();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        ScatteringData {
            lambdas,
            a: vec![one; n],
            b: vec![zero; n],
            r: vec![zero; n],
            min_abs_a: 1.0,
            max_unitarity_defect: 0.0,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.r.iter().all(|r| *r == Complex64::new(0.0, 0.0))
    }

    /// Indices of the positive-λ nodes.
    pub fn positive_range(&self) -> std::ops::Range<usize> {
        self.lambdas.partition_point(|l| *l <= 0.0)..self.lambdas.len()
    }

    pub fn negative_range(&self) -> std::ops::Range<usize> {
        0..self.lambdas.partition_point(|l| *l < 0.0)
    }

    pub fn to_json(&self, meta: serde_json::Value) -> serde_json::Value {
        let col = |v: &[Complex64], f: fn(&Complex64) -> f64| v.iter().map(f).collect::<Vec<f64>>();
        serde_json::json!({
            "lambda": self.lambdas,
            "a_re": col(&self.a, |z| z.re),
            "a_im": col(&self.a, |z| z.im),
            "b_re": col(&self.b, |z| z.re),
            "b_im": col(&self.b, |z| z.im),
            "r_re": col(&self.r, |z| z.re),
            "r_im": col(&self.r, |z| z.im),
            "min_abs_a": self.min_abs_a,
            "max_unitarity_defect": self.max_unitarity_defect,
            "meta": meta,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let bad = |k: &str| EbError::Config(format!("scattering JSON: missing or malformed `{k}`"));
        let arr = |k: &str| -> Result<Vec<f64>> {
            v.get(k)
                .and_then(|a| a.as_array())
                .ok_or_else(|| bad(k))?
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| bad(k)))
                .collect()
        };
        let cplx = |re: &str, im: &str| -> Result<Vec<Complex64>> {
            Ok(arr(re)?.into_iter().zip(arr(im)?).map(|(a, b)| Complex64::new(a, b)).collect())
        };
        let lambdas = arr("lambda")?;
        let a = cplx("a_re", "a_im")?;
        let b = cplx("b_re", "b_im")?;
        let r = cplx("r_re", "r_im")?;
        if a.len() != lambdas.len() || b.len() != lambdas.len() || r.len() != lambdas.len() {
            return Err(bad("lambda"));
        }
        let scalar = |k: &str| v.get(k).and_then(|x| x.as_f64()).ok_or_else(|| bad(k));
        Ok(ScatteringData {
            lambdas,
            a,
            b,
            r,
            min_abs_a: scalar("min_abs_a")?,
            max_unitarity_defect: scalar("max_unitarity_defect")?,
        })
    }
}

/// Positive half of the spectral grid: linear step up to min(4, λ_max) with
/// five sixths of the nodes, then a geometric stretch to λ_max.
pub fn positive_nodes(lambda_max: f64, n_positive: usize) -> Vec<f64> {
    let lin_end = lambda_max.min(4.0);
    let n_geo = if lambda_max > lin_end { n_positive / 6 } else { 0 };
    let n_lin = n_positive - n_geo;
    let step = lin_end / n_lin as f64;
    let mut out: Vec<f64> = (1..=n_lin).map(|k| k as f64 * step).collect();
    if n_geo > 0 {
        let ratio = (lambda_max / lin_end).powf(1.0 / n_geo as f64);
        out.extend((1..=n_geo).map(|k| lin_end * ratio.powi(k as i32)));
        if let Some(last) = out.last_mut() {
            *last = lambda_max;
        }
    }
    out
}

/// Symmetric sweep grid: negatives (mirrored) then positives, increasing.
pub fn spectral_grid(lambda_max: f64, n_positive: usize) -> Vec<f64> {
    let pos = positive_nodes(lambda_max, n_positive);
    pos.iter().rev().map(|l| -l).chain(pos.iter().copied()).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub jost: JostOptions,
    pub a_floor: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { jost: JostOptions::default(), a_floor: 0.05 }
    }
}

/// Tabulate a, b, r. Every λ is computed independently (negative nodes too).
pub fn reflection_sweep(p: &Profile, lambdas: &[f64], opts: &SweepOptions) -> Result<ScatteringData> {
    if lambdas.windows(2).any(|w| w[1] <= w[0]) || lambdas.iter().any(|l| *l == 0.0 || !l.is_finite()) {
        return Err(EbError::BadParams("sweep nodes must be finite, strictly increasing and exclude 0".into()));
    }
    let sys = JostSystem::new(p, opts.jost);
    let idx = default_match_index(p);
    let ab: Vec<(Complex64, Complex64)> = lambdas
        .par_iter()
        .map(|&l| sys.scattering_at_node(l, idx))
        .collect::<Result<_>>()?;
    let a: Vec<Complex64> = ab.iter().map(|x| x.0).collect();
    let b: Vec<Complex64> = ab.iter().map(|x| x.1).collect();
    let r = a.iter().zip(&b).map(|(a, b)| b / a).collect();
    let min_abs_a = a.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let max_unitarity_defect = a
        .iter()
        .zip(&b)
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);
    if min_abs_a < opts.a_floor {
        return Err(EbError::AssumptionViolated { min_abs_a, a_floor: opts.a_floor });
    }
    Ok(ScatteringData {
        lambdas: lambdas.to_vec(),
        a,
        b,
        r,
        min_abs_a,
        max_unitarity_defect,
    })
}

pub const SMALL_LAMBDA_MAX: f64 = 0.1;

/// max over x and both sides of |μ⁰± − (I + iqσ₁λ)|, where
/// μ⁰₊ = G⁻¹ μ₊ e^{−iλc₊σ₃} and μ⁰₋ = G⁻¹ μ₋ e^{iλc₋σ₃}.
pub fn small_lambda_check(p: &Profile, lambda: f64) -> Result<f64> {
    if lambda.abs() > SMALL_LAMBDA_MAX {
        return Err(EbError::OutOfRange { lambda: lambda.abs(), max: SMALL_LAMBDA_MAX });
    }
    let sys = JostSystem::new(p, JostOptions { tol: 1e-12 });
    let gauge = GaugeMatrix::from_profile(p);
    let ch = charges(p);
    let l = Complex64::from(lambda);
    let plus = sys.jost(l, Side::Plus)?;
    let minus = sys.jost(l, Side::Minus)?;
    let mut worst: f64 = 0.0;
    for i in 0..p.grid.n {
        let g = gauge.values[i];
        // G is a rotation, so G⁻¹ = Gᵀ.
        let ginv = Mat2::from_real([[g[0][0], g[1][0]], [g[0][1], g[1][1]]]);
        let iql = Complex64::new(0.0, p.q[i] * lambda);
        let model = Mat2::new(Complex64::new(1.0, 0.0), iql, iql, Complex64::new(1.0, 0.0));
        let ep = Mat2::diag_exp_sigma3(Complex64::from_polar(1.0, -lambda * ch.c_plus_of_x[i]));
        let em = Mat2::diag_exp_sigma3(Complex64::from_polar(1.0, lambda * ch.c_minus_of_x[i]));
        let r_plus = (ginv * plus.values[i] * ep - model).max_abs();
        let r_minus = (ginv * minus.values[i] * em - model).max_abs();
        worst = worst.max(r_plus).max(r_minus);
    }
    Ok(worst)
}
