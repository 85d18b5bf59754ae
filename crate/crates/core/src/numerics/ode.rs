//! Dormand–Prince 5(4) embedded Runge–Kutta stepping.
//!
//! The tableau is exposed through [`dp5_step`] so that callers with an unusual
//! state layout (the integrating-factor PDE stepper) can drive it with their own
//! error norm, while [`Integrator`] provides the usual adaptive driver for small
//! states such as the 2×2 Jost matrices.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
}

/// Vector-space operations needed by the stepper.
pub trait OdeState: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);

    fn scale(&mut self, a: f64);

    /// Scaled error of a step: ≤ 1 means acceptable.
    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Result of one Dormand–Prince step.
pub struct Dp5Step<S> {
    pub y: S,
    pub err: S,
    /// Derivative at `(t + h, y)`; reusable as the first stage of the next step.
    pub k_last: S,
}

/// One DP5(4) step from `(t, y)` with step `h` given `k1 = f(t, y)`.
pub fn dp5_step<S, F>(f: &mut F, t: f64, y: &S, k1: &S, h: f64) -> Dp5Step<S>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S + ?Sized,
{
    let mut k: Vec<S> = Vec::with_capacity(7);
    k.push(k1.clone());
    for stage in 1..7 {
        let mut ys = y.clone();
        for (j, kj) in k.iter().enumerate() {
            let a = A[stage][j];
            if a != 0.0 {
                ys.axpy(h * a, kj);
            }
        }
        if stage == 6 {
            // Stage 7 is evaluated at the 5th-order solution (FSAL).
            let k7 = f(t + h, &ys);
            let mut err = k[0].clone();
            err.scale(h * E[0]);
            for (j, kj) in k.iter().enumerate().skip(1) {
                if E[j] != 0.0 {
                    err.axpy(h * E[j], kj);
                }
            }
            err.axpy(h * E[6], &k7);
            return Dp5Step {
                y: ys,
                err,
                k_last: k7,
            };
        }
        let ks = f(t + C[stage] * h, &ys);
        k.push(ks);
    }
    unreachable!("the seventh stage always returns")
}

/// Step-size update factor for an error ratio from a 5th-order pair.
pub fn step_factor(err_ratio: f64, safety: f64) -> f64 {
    if err_ratio <= 0.0 || !err_ratio.is_finite() {
        return if err_ratio.is_finite() { 5.0 } else { 0.2 };
    }
    (safety * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
}

#[derive(Debug, Clone, Copy)]
pub struct Controller {
    pub atol: f64,
    pub rtol: f64,
    pub safety: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Controller {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Controller {
            atol,
            rtol,
            safety: 0.9,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

/// Adaptive driver that can be advanced piecewise through a list of output
/// points, keeping its step-size estimate and first-same-as-last derivative.
pub struct Integrator<S> {
    ctl: Controller,
    h: f64,
    fsal: Option<(f64, S)>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<S: OdeState> Integrator<S> {
    pub fn new(ctl: Controller, h_init: f64) -> Self {
        Integrator {
            ctl,
            h: h_init.abs().min(ctl.h_max),
            fsal: None,
            accepted: 0,
            rejected: 0,
        }
    }

    /// Integrate from `(t, y)` to `t_target` (either direction).
    pub fn advance<F>(&mut self, f: &mut F, mut t: f64, mut y: S, t_target: f64) -> Result<S, OdeError>
    where
        F: FnMut(f64, &S) -> S,
    {
        let dir = if t_target >= t { 1.0 } else { -1.0 };
        let mut k1 = match self.fsal.take() {
            Some((tf, k)) if tf == t => k,
            _ => f(t, &y),
        };
        while (t_target - t) * dir > 0.0 {
            let remaining = (t_target - t).abs();
            let mut h = self.h.min(self.ctl.h_max);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let step = dp5_step(f, t, &y, &k1, dir * h);
            let ratio = S::error_ratio(&step.err, &y, &step.y, self.ctl.atol, self.ctl.rtol);
            let factor = step_factor(ratio, self.ctl.safety);
            if ratio <= 1.0 {
                t = if last { t_target } else { t + dir * h };
                y = step.y;
                k1 = step.k_last;
                self.accepted += 1;
                // A truncated final step says nothing about the natural step size.
                if !last || h * factor > self.h {
                    self.h = (h * factor).min(self.ctl.h_max);
                }
                if self.accepted > self.ctl.max_steps {
                    return Err(OdeError::TooManySteps {
                        t,
                        max_steps: self.ctl.max_steps,
                    });
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
                if self.h < self.ctl.h_min {
                    return Err(OdeError::StepUnderflow { t, h: self.h });
                }
            }
        }
        self.fsal = Some((t, k1));
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug)]
    struct V(Vec<f64>);

    impl OdeState for V {
        fn axpy(&mut self, a: f64, x: &Self) {
            for (s, xv) in self.0.iter_mut().zip(&x.0) {
                *s += a * xv;
            }
        }
        fn scale(&mut self, a: f64) {
            self.0.iter_mut().for_each(|s| *s *= a);
        }
        fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
            err.0
                .iter()
                .zip(y0.0.iter().zip(&y1.0))
                .map(|(e, (a, b))| e.abs() / (atol + rtol * a.abs().max(b.abs())))
                .fold(0.0, f64::max)
        }
    }

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let mut f = |_t: f64, y: &V| V(vec![y.0[1], -y.0[0]]);
        let mut integ = Integrator::new(Controller::new(1e-11, 1e-11), 0.1);
        let y = integ.advance(&mut f, 0.0, V(vec![1.0, 0.0]), 10.0).unwrap();
        assert!((y.0[0] - 10.0_f64.cos()).abs() < 1e-9);
        assert!((y.0[1] + 10.0_f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration_and_piecewise_advance() {
        let mut f = |_t: f64, y: &V| V(vec![-2.0 * y.0[0]]);
        let mut integ = Integrator::new(Controller::new(1e-12, 1e-12), 0.05);
        let mut y = V(vec![1.0]);
        let mut t = 0.0;
        for k in 1..=10 {
            let next = -0.1 * k as f64;
            y = integ.advance(&mut f, t, y, next).unwrap();
            t = next;
        }
        assert!((y.0[0] - 2.0_f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn fifth_order_convergence_with_fixed_steps() {
        // y' = y, one step of size h: error should scale like h^6 locally.
        let mut f = |_t: f64, y: &V| V(y.0.clone());
        let err = |h: f64, f: &mut dyn FnMut(f64, &V) -> V| {
            let y0 = V(vec![1.0]);
            let k1 = f(0.0, &y0);
            let s = dp5_step(f, 0.0, &y0, &k1, h);
            (s.y.0[0] - h.exp()).abs()
        };
        let e1 = err(0.2, &mut f);
        let e2 = err(0.1, &mut f);
        let order = (e1 / e2).log2();
        assert!(order > 5.5, "local order {order}");
    }
}
