//! Acceptance suite: eleven criteria, one PASS/FAIL line each.
//!
//! Lines go straight to the process stdout so they show up without
//! `--nocapture`. The suite fails at the end if any criterion failed.

use eb_core::asymptotics::{AsymptoticOptions, Asymptotics};
use eb_core::deltafn::{delta1, delta_eval_eps, endpoint_data, nu_table, ReflectionSplines};
use eb_core::numerics::gamma::gamma;
use eb_core::pcmodel::{local_model_m1, r0_factor};
use eb_core::pdesolver::{compare_series, conservation_report, evolve_snapshots, power_law_exponent, PdeOptions, PdeState};
use eb_core::profile::{build_profile, Grid, Profile, ProfileKind, ProfileParams};
use eb_core::scattering::{reflection_sweep, scattering_at, small_lambda_check, spectral_grid, ScatteringData, Side, SweepOptions};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

const AMP: f64 = 0.1;
const WIDTH: f64 = 2.0;
const LAMBDA0: f64 = 0.5;
const COMPARE_TIMES: [f64; 4] = [20.0, 40.0, 80.0, 160.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian(grid: Grid) -> Profile {
    build_profile(ProfileKind::Gaussian, &ProfileParams { amp: AMP, width: WIDTH, samples: None }, grid, 1e-10).unwrap()
}

fn scattering_profile() -> Profile {
    gaussian(Grid::new(-40.0, 40.0, 2048).unwrap())
}

struct Shared {
    profile: Profile,
    sd: ScatteringData,
    sweep_secs: f64,
}

fn c1(s: &Shared) -> Outcome {
    let pass = s.sd.max_unitarity_defect < 1e-6 && s.sweep_secs < 60.0;
    outcome(pass, format!("max ||a|²+|b|²−1| = {:.2e} over {} nodes in {:.1} s", s.sd.max_unitarity_defect, s.sd.lambdas.len(), s.sweep_secs))
}

fn c2(s: &Shared) -> Outcome {
    let n = s.sd.lambdas.len();
    let mut worst: f64 = 0.0;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        assert_eq!(s.sd.lambdas[i], -s.sd.lambdas[j]);
        worst = worst.max((s.sd.r[i] - s.sd.r[j].conj()).norm());
    }
    outcome(worst < 1e-7, format!("max |r(−λ) − conj r(λ)| = {worst:.2e}"))
}

fn c3(s: &Shared) -> Outcome {
    let (l, d): (Vec<f64>, Vec<f64>) = s
        .sd
        .lambdas
        .iter()
        .zip(&s.sd.a)
        .filter(|(l, _)| **l >= 4.0 && **l <= 16.0)
        .map(|(l, a)| (*l, (a - 1.0).norm()))
        .unzip();
    let slope = power_law_exponent(&l, &d);
    outcome(slope <= -0.9, format!("slope of log|a−1| on [4,16] = {slope:.3} ({} nodes)", l.len()))
}

fn c4(s: &Shared) -> Outcome {
    let e1 = small_lambda_check(&s.profile, 0.05).unwrap();
    let e2 = small_lambda_check(&s.profile, 0.025).unwrap();
    let ratio = e1 / e2;
    outcome((3.5..=4.5).contains(&ratio), format!("residual ratio {ratio:.3} ({e1:.2e} / {e2:.2e})"))
}

fn c5(s: &Shared) -> Outcome {
    let nt = nu_table(&s.sd, LAMBDA0).unwrap();
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let x = LAMBDA0 + 0.05 + 0.1 * k as f64;
        let up = delta_eval_eps(&nt, Complex64::new(x, eps), 1e-12).unwrap();
        let down = delta_eval_eps(&nt, Complex64::new(x, -eps), 1e-12).unwrap();
        let (a, b) = scattering_at(&s.profile, x).unwrap();
        let jump = 1.0 + (b / a).norm_sqr();
        worst = worst.max((up / down - jump).norm());
    }
    outcome(worst < 1e-3, format!("max |δ₊/δ₋ − (1+|r|²)| = {worst:.2e} at ε = 1e-6, 10 points on ({}, {})", LAMBDA0, LAMBDA0 + 1.0))
}

fn c6(s: &Shared) -> Outcome {
    let nt = nu_table(&s.sd, LAMBDA0).unwrap();
    let h = 1e-4;
    let dp = delta_eval_eps(&nt, Complex64::new(h, 0.0), 1e-12).unwrap();
    let dm = delta_eval_eps(&nt, Complex64::new(-h, 0.0), 1e-12).unwrap();
    let d1 = delta1(&nt, LAMBDA0);
    let err = ((dp - dm) / (2.0 * h) - d1).norm();
    outcome(err < 1e-5, format!("|centred difference − δ₁| = {err:.2e}, δ₁ = {:.6e}i", d1.im))
}

fn c7() -> Outcome {
    let mut worst: f64 = 0.0;
    for nu in [-0.05, -0.3, -1.0] {
        let g = gamma(Complex64::new(0.0, nu)).norm_sqr();
        worst = worst.max((g - PI / (nu * (PI * nu).sinh())).abs());
    }
    outcome(worst < 1e-10, format!("max ||Γ(iν)|² − π/(ν sinh πν)| = {worst:.2e}"))
}

fn c8(s: &Shared) -> Outcome {
    let rs = ReflectionSplines::new(&s.sd).unwrap();
    let nt = nu_table(&s.sd, LAMBDA0).unwrap();
    let ed = endpoint_data(&nt, LAMBDA0, 1).unwrap();
    let r0 = r0_factor(&rs, &ed, LAMBDA0, 80.0).unwrap();
    let plus = local_model_m1(r0, ed.nu0, Side::Plus).unwrap();
    let minus = local_model_m1(r0, ed.nu0, Side::Minus).unwrap();
    let exact = minus.m1_12 == -plus.m1_12.conj() && minus.m1_21 == -plus.m1_21.conj();
    let kappa = -ed.nu0;
    let modulus = (plus.m1_12.norm_sqr() - kappa).abs() / kappa;
    outcome(
        exact && modulus < 1e-10,
        format!("bitwise −conj: {exact}; ||M₁₂|²−κ|/κ = {modulus:.1e} (κ = {kappa:.4e}, t = 80)"),
    )
}

fn pde_states() -> (Vec<PdeState>, f64) {
    let start = Instant::now();
    let p = gaussian(Grid::new(-300.0, 13700.0, 32768).unwrap());
    let mut times: Vec<f64> = (1..=10).map(|k| 10.0 * k as f64).collect();
    times.push(160.0);
    let states = evolve_snapshots(&p, &times, &PdeOptions::default()).unwrap();
    (states, start.elapsed().as_secs_f64())
}

fn c9(states: &[PdeState]) -> Outcome {
    let (t, worst) = states
        .iter()
        .filter(|s| s.t <= 100.0)
        .map(|s| (s.t, conservation_report(s)))
        .fold((0.0, 0.0), |m, v| if v.1 >= m.1 { v } else { m });
    outcome(worst < 1e-6, format!("max relative drift {worst:.2e} (at t = {t}) over 10 snapshots to t = 100"))
}

fn c10(s: &Shared, states: &[PdeState], pde_secs: f64) -> Outcome {
    let start = Instant::now();
    let chosen: Vec<PdeState> = states.iter().filter(|st| COMPARE_TIMES.contains(&st.t)).cloned().collect();
    let asy = Asymptotics::new(&s.sd, AsymptoticOptions::default()).unwrap();
    let rep = compare_series(&chosen, &asy, (2.0, 4.0)).unwrap();
    let last = rep.per_time.last().unwrap();
    let a = (-0.6..=-0.4).contains(&rep.signal_exponent);
    let b = rep.residual_strictly_decreasing && rep.residual_exponent <= -0.55;
    let c = last.t == 160.0 && last.zero_crossing_shift < 0.15;
    let secs = pde_secs + s.sweep_secs + start.elapsed().as_secs_f64();
    let residuals: Vec<String> = rep.residuals.iter().map(|r| format!("{r:.2e}")).collect();
    outcome(
        a && b && c && secs < 600.0,
        format!(
            "(a) signal exponent {:.3} (b) residuals [{}] exponent {:.3} (c) zero-crossing shift {:.3} λ at t = 160; {:.0} s",
            rep.signal_exponent,
            residuals.join(", "),
            rep.residual_exponent,
            last.zero_crossing_shift,
            secs
        ),
    )
}

const SMALL_CONFIG: &str = r#"
[profile]
kind = "gaussian"
amp = 0.1
width = 2.0

[pde]
x_min = -64.0
x_max = 4031.75
n = 16384
snapshot_times = [5.0, 10.0]
"#;

fn c11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, SMALL_CONFIG).unwrap();
    let mut reports = Vec::new();
    for name in ["first", "second"] {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_eb"))
            .args(["compare", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("eb compare failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
        reports.push(std::fs::read(out.join("report.json")).unwrap());
    }
    let same = reports[0] == reports[1];
    outcome(same && !reports[0].is_empty(), format!("report.json byte-identical across two runs: {same} ({} bytes)", reports[0].len()))
}

fn report(lines: &mut Vec<(String, bool)>, id: &str, name: &str, o: Outcome) {
    let line = format!("{id:<4}{name:<26}{}  {}\n", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    lines.push((format!("{id} {name}"), o.pass));
}

#[test]
fn acceptance() {
    let profile = scattering_profile();
    let start = Instant::now();
    let sd = reflection_sweep(&profile, &spectral_grid(16.0, 240), &SweepOptions::default()).unwrap();
    let shared = Shared { profile, sd, sweep_secs: start.elapsed().as_secs_f64() };

    let mut lines = Vec::new();
    report(&mut lines, "C1", "unitarity", c1(&shared));
    report(&mut lines, "C2", "symmetry", c2(&shared));
    report(&mut lines, "C3", "large-λ decay", c3(&shared));
    report(&mut lines, "C4", "small-λ expansion", c4(&shared));
    report(&mut lines, "C5", "δ jump", c5(&shared));
    report(&mut lines, "C6", "δ₁ Taylor", c6(&shared));
    report(&mut lines, "C7", "Γ identity", c7());
    report(&mut lines, "C8", "local-model symmetry", c8(&shared));
    let (states, pde_secs) = pde_states();
    report(&mut lines, "C9", "PDE conservation", c9(&states));
    report(&mut lines, "C10", "main asymptotics", c10(&shared, &states, pde_secs));
    report(&mut lines, "C11", "determinism", c11());

    let failed: Vec<&String> = lines.iter().filter(|l| !l.1).map(|l| &l.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
