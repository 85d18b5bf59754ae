//! Local Lagrange interpolation on a uniform grid.

/// Stencil width used by [`uniform_weights`].
pub const STENCIL: usize = 8;

/// Start index and weights of the 8-point Lagrange stencil for evaluating
/// samples at `x` on the grid `x0 + i*h`, `i < n`. Near the ends the stencil
/// is shifted inward rather than shrunk.
pub fn uniform_weights(x0: f64, h: f64, n: usize, x: f64) -> (usize, [f64; STENCIL]) {
    assert!(n >= STENCIL, "grid too short for the interpolation stencil");
    let u = (x - x0) / h;
    let base = u.floor() as isize - (STENCIL as isize / 2 - 1);
    let start = base.clamp(0, (n - STENCIL) as isize) as usize;
    let mut w = [0.0; STENCIL];
    for (j, wj) in w.iter_mut().enumerate() {
        let xj = (start + j) as f64;
        let mut p = 1.0;
        for k in 0..STENCIL {
            if k != j {
                let xk = (start + k) as f64;
                p *= (u - xk) / (xj - xk);
            }
        }
        *wj = p;
    }
    (start, w)
}

/// Interpolate `values` (sampled on `x0 + i*h`) at `x`.
pub fn uniform_eval(x0: f64, h: f64, values: &[f64], x: f64) -> f64 {
    let (start, w) = uniform_weights(x0, h, values.len(), x);
    w.iter().zip(&values[start..start + STENCIL]).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_degree_seven() {
        let f = |x: f64| 1.0 - x + 0.5 * x.powi(3) - 0.01 * x.powi(7);
        let v: Vec<f64> = (0..20).map(|i| f(-1.0 + 0.2 * i as f64)).collect();
        for x in [-1.0, -0.93, 0.0, 1.234, 2.8] {
            assert!((uniform_eval(-1.0, 0.2, &v, x) - f(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn weights_sum_to_one() {
        let (_, w) = uniform_weights(0.0, 0.1, 100, 3.3333);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }
}
