//! Fourier differentiation on a uniform periodised grid.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// FFT plans and wavenumbers for `n` samples with spacing `h` (period `n*h`).
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let period = n as f64 * h;
        let k = (0..n)
            .map(|j| {
                let j = j as isize;
                let m = if j <= (n as isize - 1) / 2 { j } else { j - n as isize };
                2.0 * PI * m as f64 / period
            })
            .collect();
        Spectral {
            n,
            k,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Angular wavenumbers in FFT order. For even `n` the Nyquist slot holds
    /// the negative frequency.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        self.n.is_multiple_of(2) && j == self.n / 2
    }

    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::from(v)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Unnormalised inverse transform.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
    }

    /// Inverse transform returning the real part, normalised.
    pub fn inverse_real(&self, mut hat: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut hat);
        let s = 1.0 / self.n as f64;
        hat.into_iter().map(|c| c.re * s).collect()
    }

    /// First and second derivatives. The Nyquist mode is dropped from the odd
    /// derivative, kept (with k²) in the even one.
    pub fn derivatives(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(q.len(), self.n);
        let hat = self.forward(q);
        let mut d1 = hat.clone();
        let mut d2 = hat;
        for j in 0..self.n {
            let k = self.k[j];
            d1[j] = if self.is_nyquist(j) {
                Complex64::new(0.0, 0.0)
            } else {
                d1[j] * Complex64::new(0.0, k)
            };
            d2[j] *= -k * k;
        }
        (self.inverse_real(d1), self.inverse_real(d2))
    }
}
