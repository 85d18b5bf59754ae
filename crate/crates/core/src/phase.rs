//! Stationary-phase bookkeeping for θ(λ) = 4λ³ − 12λ₀²λ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EbError, Result};

pub const DEFAULT_N_SIM: f64 = 25.0;

/// Which coordinate defines λ₀: x itself, or y ≈ x − c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateMode {
    #[default]
    XBased,
    YBased,
}

/// Admissible similarity ratios `[1/N, 12 N]`, i.e. λ₀ ∈ [1/√(12N), √N].
pub fn similarity_window(n_sim: f64) -> (f64, f64) {
    (1.0 / n_sim, 12.0 * n_sim)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseContext {
    pub lambda0: f64,
    pub t: f64,
    pub ratio: f64,
    pub mode: CoordinateMode,
}

impl PhaseContext {
    pub fn new(ratio: f64, t: f64, n_sim: f64, mode: CoordinateMode) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(EbError::BadParams(format!("time must be positive, got {t}")));
        }
        let (lo, hi) = similarity_window(n_sim);
        if !(ratio >= lo && ratio <= hi) {
            return Err(EbError::RegionViolation { ratio, lo, hi });
        }
        Ok(PhaseContext {
            lambda0: (ratio / 12.0).sqrt(),
            t,
            ratio,
            mode,
        })
    }
}

pub fn theta(lambda: Complex64, ctx: &PhaseContext) -> Complex64 {
    let l0 = ctx.lambda0;
    lambda * (lambda * lambda * 4.0 - 12.0 * l0 * l0)
}

pub fn dtheta(lambda: Complex64, ctx: &PhaseContext) -> Complex64 {
    let l0 = ctx.lambda0;
    lambda * lambda * 12.0 - 12.0 * l0 * l0
}

/// Re(2itθ) = −24t((Re λ)² − (Im λ)²/3 − λ₀²) Im λ.
pub fn re_2it_theta(lambda: Complex64, ctx: &PhaseContext) -> f64 {
    let (u, v) = (lambda.re, lambda.im);
    -24.0 * ctx.t * (u * u - v * v / 3.0 - ctx.lambda0 * ctx.lambda0) * v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(l0: f64, t: f64) -> PhaseContext {
        PhaseContext::new(12.0 * l0 * l0, t, DEFAULT_N_SIM, CoordinateMode::XBased).unwrap()
    }

    #[test]
    fn values_at_special_points() {
        let c = ctx(0.7, 1.0);
        let l0 = c.lambda0;
        assert!((theta(Complex64::from(l0), &c).re + 8.0 * l0.powi(3)).abs() < 1e-14);
        assert_eq!(theta(Complex64::new(0.0, 0.0), &c), Complex64::new(0.0, 0.0));
        assert!((theta(Complex64::from(-l0), &c).re - 8.0 * l0.powi(3)).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_complex_arithmetic() {
        let c = ctx(0.5, 3.0);
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-1.1, 0.7), Complex64::new(2.0, -0.4)] {
            let direct = (Complex64::new(0.0, 2.0 * c.t) * theta(z, &c)).re;
            assert!((direct - re_2it_theta(z, &c)).abs() < 1e-12);
            assert!((re_2it_theta(z.conj(), &c) + re_2it_theta(z, &c)).abs() < 1e-12);
            assert_eq!(theta(-z, &c), -theta(z, &c));
        }
        let l0 = c.lambda0;
        let up = re_2it_theta(Complex64::new(0.0, l0), &ctx(l0, 1.0));
        assert!((up - 32.0 * l0.powi(3)).abs() < 1e-12);
        assert!(re_2it_theta(Complex64::new(2.0 * l0, 1e-3), &c) < 0.0);
        assert_eq!(re_2it_theta(Complex64::from(1.3), &c), 0.0);
    }

    #[test]
    fn stationary_at_plus_minus_lambda0() {
        let c = ctx(0.6, 1.0);
        for l in [c.lambda0, -c.lambda0] {
            let h = 1e-6;
            let fd = (theta(Complex64::from(l + h), &c) - theta(Complex64::from(l - h), &c)).re / (2.0 * h);
            assert!(fd.abs() < 1e-8 * 12.0 * l * l);
            assert!(dtheta(Complex64::from(l), &c).re.abs() < 1e-14);
        }
    }

    #[test]
    fn window_is_enforced() {
        assert!(matches!(
            PhaseContext::new(1e-9, 1.0, DEFAULT_N_SIM, CoordinateMode::XBased),
            Err(EbError::RegionViolation { .. })
        ));
        assert!(PhaseContext::new(301.0, 1.0, DEFAULT_N_SIM, CoordinateMode::XBased).is_err());
    }
}
