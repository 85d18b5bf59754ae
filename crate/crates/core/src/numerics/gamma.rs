//! Complex log-gamma by the Lanczos approximation (g = 7, nine terms), with the
//! reflection formula for Re z < 1/2.

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-ish log Γ(z): continuous in the right half plane; for Re z < 1/2
/// the reflected value `ln π − ln sin(πz) − lnΓ(1−z)` is returned, whose
/// imaginary part is only defined modulo 2π.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return Complex64::from(PI.ln()) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::from(COEF[0]);
    for (k, c) in COEF.iter().enumerate().skip(1) {
        acc += *c / (z + k as f64);
    }
    let t = z + G + 0.5;
    Complex64::from(0.5 * (2.0 * PI).ln()) + (z + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// arg Γ(iκ) for real κ ≠ 0, continuous in κ on each half line:
/// Γ(iκ) = Γ(1+iκ)/(iκ), so arg = Im lnΓ(1+iκ) − sign(κ)·π/2.
pub fn arg_gamma_imag(kappa: f64) -> f64 {
    ln_gamma(Complex64::new(1.0, kappa)).im - kappa.signum() * PI / 2.0
}
