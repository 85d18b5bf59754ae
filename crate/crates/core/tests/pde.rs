//! Self-consistency of the direct solver at t = 10.

use eb_core::pdesolver::{conservation_report, evolve, PdeOptions, PdeState};
use eb_core::profile::{build_profile, Grid, Profile, ProfileKind, ProfileParams};
use std::sync::OnceLock;

const T: f64 = 10.0;

// Spacing 4096/n; the right end leaves room for the short waves the
// nonlinearity sheds, which outrun the main wave train.
fn gaussian(n: usize) -> Profile {
    let grid = Grid::new(-64.0, -64.0 + 4096.0 * (n - 1) as f64 / n as f64, n).unwrap();
    build_profile(ProfileKind::Gaussian, &ProfileParams { amp: 0.1, width: 2.0, samples: None }, grid, 1e-10).unwrap()
}

fn run(n: usize, tol: f64) -> PdeState {
    evolve(&gaussian(n), T, &PdeOptions { ode_tol: tol, ..PdeOptions::default() }).unwrap()
}

fn base() -> &'static PdeState {
    static S: OnceLock<PdeState> = OnceLock::new();
    S.get_or_init(|| run(32768, 1e-10))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn tightening_tolerance_changes_little() {
    let loose = run(32768, 1e-9);
    let d = max_diff(&loose.profile.q, &base().profile.q);
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn doubling_resolution_changes_little() {
    let coarse = run(16384, 1e-10);
    let fine = &base().profile.q;
    let d = (0..16384).map(|i| (coarse.profile.q[i] - fine[2 * i]).abs()).fold(0.0, f64::max);
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn drift_small_and_grows_with_tolerance() {
    let b = conservation_report(base());
    assert!(b < 1e-6, "{b:e}");
    let drifts: Vec<f64> = [1e-6, 1e-8].iter().map(|&tol| conservation_report(&run(32768, tol))).collect();
    assert!(drifts[0] > drifts[1] && drifts[1] > b, "{drifts:?} {b:e}");
}

#[test]
fn narrow_domain_reports_the_wake() {
    let grid = Grid::new(-64.0, 448.0, 4096).unwrap();
    let p = build_profile(ProfileKind::Gaussian, &ProfileParams { amp: 0.1, width: 2.0, samples: None }, grid, 1e-10).unwrap();
    let e = evolve(&p, T, &PdeOptions::default()).unwrap_err();
    assert!(matches!(e, eb_core::EbError::WakeReachedBoundary { .. }), "{e}");
    assert!(!e.is_validation());
}
