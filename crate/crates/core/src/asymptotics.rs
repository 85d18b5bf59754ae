//! Leading-order long-time solution in the oscillating region:
//! q ≈ √(κ/(12tλ̂₀⁵)) sin(16tλ̂₀³ + κ ln(48tλ̂₀) + Θ),  λ̂₀ = √(x/12t),
//! Θ = −5π/4 − arg Γ(iκ) − arg r̄(λ̂₀) + 2∫ ln|s−λ̂₀| dν(s) + 2iλ̂₀δ₁.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::deltafn::{delta1, NuTable, ReflectionSplines, DEFAULT_GRADING};
use crate::error::{EbError, Result};
use crate::numerics::gamma::arg_gamma_imag;
use crate::numerics::quad::{integrate, QuadTol};
use crate::phase::{CoordinateMode, PhaseContext, DEFAULT_N_SIM};
use crate::scattering::ScatteringData;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptions {
    pub mode: CoordinateMode,
    pub n_sim: f64,
    /// Total charge c, used by the y-based mode (y ≈ x − c).
    pub c_total: f64,
    pub grading: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            mode: CoordinateMode::XBased,
            n_sim: DEFAULT_N_SIM,
            c_total: 0.0,
            grading: DEFAULT_GRADING,
        }
    }
}

/// Everything the formula consumes at one (x, t), with Θ split into summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticIngredients {
    pub lambda_hat0: f64,
    pub nu0: f64,
    pub kappa: f64,
    /// δ₁ is purely imaginary; only its imaginary part is stored.
    pub delta1_im: f64,
    pub arg_gamma: f64,
    pub arg_rbar: f64,
    pub log_integral: f64,
    pub delta1_term: f64,
    pub theta_phase: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub coordinate_mode: CoordinateMode,
}

impl AsymptoticIngredients {
    pub fn delta1(&self) -> Complex64 {
        Complex64::new(0.0, self.delta1_im)
    }

    pub fn q(&self) -> f64 {
        self.amplitude * self.phase.sin()
    }
}

/// λ̂₀ = √(coord/12t), refused outside the similarity window.
pub fn stationary_point(coord: f64, t: f64, n_sim: f64) -> Result<f64> {
    Ok(PhaseContext::new(coord / t, t, n_sim, CoordinateMode::XBased)?.lambda0)
}

/// 2(∫+∫) ν′(s) ln|s − λ̂₀| ds over both rays.
pub fn log_integral(nt: &NuTable, lambda_hat0: f64) -> f64 {
    let tol = QuadTol::default();
    let mut f = |s: f64| {
        let d = (s - lambda_hat0).abs();
        Complex64::from(if d == 0.0 { 0.0 } else { nt.nu_prime_at(s) * d.ln() })
    };
    let pos: Vec<f64> = ray_breaks(nt, 1.0);
    let neg: Vec<f64> = ray_breaks(nt, -1.0);
    2.0 * (integrate(&mut f, &pos, &tol) + integrate(&mut f, &neg, &tol)).re
}

fn ray_breaks(nt: &NuTable, sign: f64) -> Vec<f64> {
    let mut v: Vec<f64> = nt.s.iter().copied().filter(|s| s * sign > 0.0).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Θ from its five summands; returns (Θ, arg Γ, arg r̄, log term, δ₁ term).
pub fn theta_big(rs: &ReflectionSplines, nt: &NuTable, lambda_hat0: f64, delta1: Complex64) -> Result<[f64; 5]> {
    let kappa = -nt.nu_at(lambda_hat0);
    if rs.is_trivial() || kappa <= 0.0 || rs.r(lambda_hat0).norm() < crate::pcmodel::DEGENERATE_R {
        return Err(EbError::DegenerateReflection);
    }
    let arg_gamma = arg_gamma_imag(kappa);
    let arg_rbar = -rs.arg_r(lambda_hat0);
    let log_term = log_integral(nt, lambda_hat0);
    let d1 = Complex64::new(0.0, 2.0 * lambda_hat0) * delta1;
    let theta = -1.25 * PI - arg_gamma - arg_rbar + log_term + d1.re;
    Ok([theta, arg_gamma, arg_rbar, log_term, d1.re])
}

/// Asymptotic evaluator for one set of scattering data.
#[derive(Debug, Clone)]
pub struct Asymptotics {
    rs: ReflectionSplines,
    pub opts: AsymptoticOptions,
}

impl Asymptotics {
    pub fn new(sd: &ScatteringData, opts: AsymptoticOptions) -> Result<Self> {
        Ok(Asymptotics { rs: ReflectionSplines::new(sd)?, opts })
    }

    pub fn splines(&self) -> &ReflectionSplines {
        &self.rs
    }

    fn coord(&self, x: f64) -> f64 {
        match self.opts.mode {
            CoordinateMode::XBased => x,
            CoordinateMode::YBased => x - self.opts.c_total,
        }
    }

    pub fn lambda_hat0(&self, x: f64, t: f64) -> Result<f64> {
        stationary_point(self.coord(x), t, self.opts.n_sim)
    }

    /// Ingredients at (x, t); `Ok(None)` when the reflection vanishes there.
    pub fn ingredients(&self, x: f64, t: f64) -> Result<Option<AsymptoticIngredients>> {
        let l0 = self.lambda_hat0(x, t)?;
        if self.rs.is_trivial() {
            return Ok(None);
        }
        let nt = NuTable::new(self.rs.clone(), l0, self.opts.grading)?;
        let d1 = delta1(&nt, l0);
        let parts = match theta_big(&self.rs, &nt, l0, d1) {
            Ok(p) => p,
            Err(EbError::DegenerateReflection) => return Ok(None),
            Err(e) => return Err(e),
        };
        let nu0 = nt.nu_at(l0);
        let kappa = -nu0;
        let amplitude = (kappa / (12.0 * t * l0.powi(5))).sqrt();
        let phase = 16.0 * t * l0.powi(3) + kappa * (48.0 * t * l0).ln() + parts[0];
        Ok(Some(AsymptoticIngredients {
            lambda_hat0: l0,
            nu0,
            kappa,
            delta1_im: d1.im,
            arg_gamma: parts[1],
            arg_rbar: parts[2],
            log_integral: parts[3],
            delta1_term: parts[4],
            theta_phase: parts[0],
            amplitude,
            phase,
            coordinate_mode: self.opts.mode,
        }))
    }

    pub fn q(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.ingredients(x, t)?.map_or(0.0, |i| i.q()))
    }

    /// Evaluate on many x at one t, in parallel, keeping input order.
    pub fn slice(&self, xs: &[f64], t: f64) -> Result<Vec<Option<AsymptoticIngredients>>> {
        xs.par_iter().map(|&x| self.ingredients(x, t)).collect()
    }
}

pub fn q_asymptotic(x: f64, t: f64, sd: &ScatteringData, opts: &AsymptoticOptions) -> Result<f64> {
    Asymptotics::new(sd, *opts)?.q(x, t)
}

/// c₊ ≈ 2λ₀⁻²(48tλ₀)^{−1/2} Im[M₁]₁₁ + iδ₁. The [M₁]₁₁ entry is not part of
/// the closed-form local model, so callers must supply it.
pub fn reconstruct_c_plus(ing: &AsymptoticIngredients, t: f64, m1_11: Option<Complex64>) -> Result<Complex64> {
    let m = m1_11.ok_or_else(|| EbError::NotAvailable("[M1]_11 of the local model is not provided".into()))?;
    let l0 = ing.lambda_hat0;
    Ok(Complex64::from(2.0 / (l0 * l0) / (48.0 * t * l0).sqrt() * m.im) + c_plus_delta1_only(ing))
}

/// The iδ₁ part of the c₊ reconstruction (experimental diagnostic).
pub fn c_plus_delta1_only(ing: &AsymptoticIngredients) -> Complex64 {
    Complex64::i() * ing.delta1()
}
