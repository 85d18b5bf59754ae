//! Parabolic-cylinder local model at ±λ₀: the rescaled reflection value r₀
//! and the closed-form off-diagonal entries of M₁.
//!
//! Everything here runs on κ = −ν(λ₀) = ln(1+|r(λ₀)|²)/2π ≥ 0, so that
//! 1 + |r₀|² = e^{2πκ}.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::deltafn::{EndpointData, ReflectionSplines};
use crate::error::{EbError, Result};
use crate::numerics::gamma::gamma;
use crate::scattering::Side;

/// |r| below this counts as zero reflection.
pub const DEGENERATE_R: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalModelData {
    pub r0: Complex64,
    pub nu0: f64,
    pub m1_12: Complex64,
    pub m1_21: Complex64,
    pub side: Side,
}

/// r₀ = r(λ₀) δ₀⁻² e^{16itλ₀³} e^{iκ ln(48tλ₀)}.
pub fn r0_factor(rs: &ReflectionSplines, ed: &EndpointData<'_>, lambda0: f64, t: f64) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(EbError::BadParams(format!("time must be positive, got {t}")));
    }
    if lambda0 < rs.lambda_lo || lambda0 > rs.lambda_hi {
        return Err(EbError::RangeTooNarrow {
            lo: rs.lambda_lo,
            hi: rs.lambda_hi,
            need_lo: lambda0,
            need_hi: lambda0,
        });
    }
    let r = rs.r(lambda0);
    let kappa = -ed.nu0;
    let phase = 16.0 * t * lambda0.powi(3) + kappa * (48.0 * t * lambda0).ln();
    Ok(r / (ed.delta0 * ed.delta0) * Complex64::from_polar(1.0, phase))
}

/// [M₁]₁₂ = √(2π) e^{−3πi/4 + πκ/2} / (i r̄₀ Γ(iκ)),
/// [M₁]₂₁ = i√(2π) e^{−πi/4 + πκ/2} / (r₀ Γ(−iκ));
/// the −λ₀ model is −conj of the +λ₀ one.
pub fn local_model_m1(r0: Complex64, nu0: f64, side: Side) -> Result<LocalModelData> {
    let kappa = -nu0;
    if r0.norm() < DEGENERATE_R || kappa <= 0.0 {
        return Err(EbError::DegenerateReflection);
    }
    let s2pi = (2.0 * PI).sqrt();
    let i = Complex64::i();
    let m12 = s2pi * Complex64::from_polar((PI * kappa / 2.0).exp(), -0.75 * PI)
        / (i * r0.conj() * gamma(Complex64::new(0.0, kappa)));
    let m21 = i * s2pi * Complex64::from_polar((PI * kappa / 2.0).exp(), -0.25 * PI)
        / (r0 * gamma(Complex64::new(0.0, -kappa)));
    let (m1_12, m1_21) = match side {
        Side::Plus => (m12, m21),
        Side::Minus => (-m12.conj(), -m21.conj()),
    };
    Ok(LocalModelData { r0, nu0, m1_12, m1_21, side })
}
