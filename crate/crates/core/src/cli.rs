//! Subcommands: scatter → asymptote → evolve → compare.
//!
//! Files carry the config hash (a JSON field, or a leading `#` line in CSV).
//! Wall-clock timings only go to stdout so reruns stay byte-identical.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use crate::asymptotics::Asymptotics;
use crate::config::RunConfig;
use crate::error::{EbError, Result};
use crate::pdesolver::{compare_series, conservation_report, evolve_snapshots, CompareReport, PdeState};
use crate::phase::similarity_window;
use crate::profile::charges;
use crate::scattering::{reflection_sweep, spectral_grid, ScatteringData};

#[derive(Debug, Parser)]
#[command(name = "eb", version, about = "Elastic beam scattering, asymptotics and direct simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `[output] directory`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a(λ), b(λ), r(λ) into scattering.json.
    Scatter(Common),
    /// Evaluate the long-time formula on the x/t window at one time.
    Asymptote {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: f64,
    },
    /// Integrate the equation directly, writing snapshots up to t-end.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long = "t-end")]
        t_end: f64,
    },
    /// Direct solution against the formula at the configured snapshot times.
    Compare(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Scatter(c) | Command::Compare(c) => c,
            Command::Asymptote { common, .. } | Command::Evolve { common, .. } => common,
        }
    }
}

/// A loaded config together with its hash and the resolved output directory.
pub struct Run {
    pub cfg: RunConfig,
    pub hash: String,
    pub out: PathBuf,
}

impl Run {
    pub fn new(cfg: RunConfig, out: Option<PathBuf>) -> Self {
        let hash = cfg.hash();
        let out = out.unwrap_or_else(|| {
            let d = &cfg.output.directory;
            if d.is_relative() && !cfg.base_dir.as_os_str().is_empty() {
                cfg.base_dir.join(d)
            } else {
                d.clone()
            }
        });
        Run { cfg, hash, out }
    }

    fn provenance(&self, cmd: &str) -> String {
        format!("eb {cmd} config_sha256={}", self.hash)
    }

    fn write(&self, name: &str, body: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        std::fs::write(&path, body)?;
        Ok(path)
    }

    fn write_json(&self, name: &str, v: &Value) -> Result<Option<PathBuf>> {
        if !self.cfg.wants("json") {
            return Ok(None);
        }
        let mut s = serde_json::to_string_pretty(v).map_err(|e| EbError::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, &s).map(Some)
    }

    fn write_csv(&self, name: &str, body: &str) -> Result<Option<PathBuf>> {
        if !self.cfg.wants("csv") {
            return Ok(None);
        }
        self.write(name, body).map(Some)
    }

    fn scattering_meta(&self) -> Value {
        let c = &self.cfg;
        json!({
            "config_sha256": self.hash,
            "profile": serde_json::to_value(&c.profile).unwrap_or(Value::Null),
            "ode_tol": c.scattering.ode_tol,
            "a_floor": c.scattering.a_floor,
            "unitarity_tol": c.scattering.unitarity_tol,
            "lambda_max": c.scattering.lambda_max,
            "n_lambda": c.scattering.n_lambda,
        })
    }

    /// Compute the scattering data and check unitarity.
    pub fn compute_scattering(&self) -> Result<ScatteringData> {
        let p = self.cfg.profile()?;
        let lams = spectral_grid(self.cfg.scattering.lambda_max, self.cfg.scattering.n_lambda);
        let sd = reflection_sweep(&p, &lams, &self.cfg.sweep_options())?;
        if sd.max_unitarity_defect > self.cfg.scattering.unitarity_tol {
            return Err(EbError::UnitarityDefect { defect: sd.max_unitarity_defect, tol: self.cfg.scattering.unitarity_tol });
        }
        Ok(sd)
    }

    /// Reuse `scattering.json` from the output directory when it was made
    /// from the same config, otherwise compute it.
    pub fn scattering(&self) -> Result<ScatteringData> {
        let path = self.out.join("scattering.json");
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(v) = serde_json::from_str::<Value>(&text) {
                if v["meta"]["config_sha256"] == Value::String(self.hash.clone()) {
                    return ScatteringData::from_json(&v);
                }
            }
        }
        self.compute_scattering()
    }

    fn asymptotics(&self) -> Result<Asymptotics> {
        let sd = self.scattering()?;
        let p = self.cfg.profile()?;
        Asymptotics::new(&sd, self.cfg.asymptotic_options(charges(&p).c_total))
    }

    fn check_window(&self) -> Result<()> {
        let [lo, hi] = self.cfg.asymptotics.window;
        let (wlo, whi) = similarity_window(self.cfg.asymptotics.n_sim);
        for r in [lo, hi] {
            if r < wlo || r > whi {
                return Err(EbError::RegionViolation { ratio: r, lo: wlo, hi: whi });
            }
        }
        Ok(())
    }
}

fn time_tag(t: f64) -> String {
    format!("{t}")
}

pub fn cmd_scatter(run: &Run) -> Result<ScatteringData> {
    let start = Instant::now();
    let sd = run.compute_scattering()?;
    run.write_json("scattering.json", &sd.to_json(run.scattering_meta()))?;
    println!("nodes                 {}", sd.lambdas.len());
    println!("unitarity worst case  {:.3e}", sd.max_unitarity_defect);
    println!("min |a|               {:.6}", sd.min_abs_a);
    println!("elapsed               {:.2} s", start.elapsed().as_secs_f64());
    Ok(sd)
}

#[derive(Serialize)]
struct SliceSidecar<'a> {
    config_sha256: &'a str,
    t: f64,
    window: [f64; 2],
    x: Vec<f64>,
    lambda_hat0: Vec<Option<f64>>,
    kappa: Vec<Option<f64>>,
    delta1_im: Vec<Option<f64>>,
    arg_gamma: Vec<Option<f64>>,
    arg_rbar: Vec<Option<f64>>,
    log_integral: Vec<Option<f64>>,
    delta1_term: Vec<Option<f64>>,
    theta_phase: Vec<Option<f64>>,
}

pub fn cmd_asymptote(run: &Run, t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(EbError::BadParams(format!("--t must be positive, got {t}")));
    }
    run.check_window()?;
    let asy = run.asymptotics()?;
    let [lo, hi] = run.cfg.asymptotics.window;
    let n = run.cfg.asymptotics.n_x;
    let xs: Vec<f64> = (0..n).map(|i| t * (lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect();
    let ing = asy.slice(&xs, t)?;

    let mut csv = format!("# {}\nx,t,q_asym,amplitude,phase\n", run.provenance("asymptote"));
    for (x, v) in xs.iter().zip(&ing) {
        let (q, a, ph) = v.map_or((0.0, 0.0, 0.0), |v| (v.q(), v.amplitude, v.phase));
        let _ = writeln!(csv, "{x},{t},{q},{a},{ph}");
    }
    let tag = time_tag(t);
    run.write_csv(&format!("asymptote_t{tag}.csv"), &csv)?;
    let pick = |f: fn(&crate::asymptotics::AsymptoticIngredients) -> f64| ing.iter().map(|v| v.as_ref().map(f)).collect();
    let side = SliceSidecar {
        config_sha256: &run.hash,
        t,
        window: [lo, hi],
        x: xs.clone(),
        lambda_hat0: pick(|v| v.lambda_hat0),
        kappa: pick(|v| v.kappa),
        delta1_im: pick(|v| v.delta1_im),
        arg_gamma: pick(|v| v.arg_gamma),
        arg_rbar: pick(|v| v.arg_rbar),
        log_integral: pick(|v| v.log_integral),
        delta1_term: pick(|v| v.delta1_term),
        theta_phase: pick(|v| v.theta_phase),
    };
    run.write_json(&format!("asymptote_t{tag}.json"), &serde_json::to_value(&side).unwrap_or(Value::Null))?;
    let peak = ing.iter().flatten().map(|v| v.amplitude).fold(0.0f64, f64::max);
    println!("t = {t}, {n} points on x/t in [{lo}, {hi}], peak envelope {peak:.4e}");
    Ok(())
}

fn run_pde(run: &Run, times: &[f64]) -> Result<Vec<PdeState>> {
    let p = run.cfg.pde_profile()?;
    evolve_snapshots(&p, times, &run.cfg.pde_options())
}

fn pde_meta(run: &Run, states: &[PdeState]) -> Value {
    let d = &run.cfg.pde;
    json!({
        "config_sha256": run.hash,
        "grid": { "x_min": d.x_min, "x_max": d.x_max, "n": d.n },
        "options": serde_json::to_value(run.cfg.pde_options()).unwrap_or(Value::Null),
        "snapshots": states.iter().map(|s| json!({
            "t": s.t,
            "steps_taken": s.steps_taken,
            "steps_rejected": s.steps_rejected,
            "c_total_initial": s.c_total_initial,
            "drift": conservation_report(s),
        })).collect::<Vec<_>>(),
    })
}

pub fn cmd_evolve(run: &Run, t_end: f64) -> Result<Vec<PdeState>> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(EbError::BadParams(format!("--t-end must be positive, got {t_end}")));
    }
    let mut times: Vec<f64> = run.cfg.pde.snapshot_times.iter().copied().filter(|t| *t < t_end).collect();
    times.push(t_end);
    let start = Instant::now();
    let states = run_pde(run, &times)?;
    for s in &states {
        run.write_csv(&format!("snapshot_t{}.csv", time_tag(s.t)), &s.profile.to_csv(Some(&run.provenance("evolve"))))?;
        println!("t = {:>8}  steps {:>6}  drift {:.3e}", s.t, s.steps_taken, conservation_report(s));
    }
    run.write_json("evolve.json", &pde_meta(run, &states))?;
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(states)
}

pub fn cmd_compare(run: &Run) -> Result<CompareReport> {
    run.check_window()?;
    let start = Instant::now();
    let asy = run.asymptotics()?;
    let states = run_pde(run, &run.cfg.pde.snapshot_times)?;
    let [lo, hi] = run.cfg.asymptotics.window;
    let report = compare_series(&states, &asy, (lo, hi))?;
    for r in &report.per_time {
        let mut csv = format!("# {}\nx,q_num,q_asym,residual\n", run.provenance("compare"));
        for i in 0..r.x.len() {
            let _ = writeln!(csv, "{},{},{},{}", r.x[i], r.q_num[i], r.q_asym[i], r.q_num[i] - r.q_asym[i]);
        }
        run.write_csv(&format!("overlay_t{}.csv", time_tag(r.t)), &csv)?;
    }
    let mut v = serde_json::to_value(&report).map_err(|e| EbError::Io(e.to_string()))?;
    v["config_sha256"] = Value::String(run.hash.clone());
    v["window"] = json!([lo, hi]);
    v["pde"] = pde_meta(run, &states);
    run.write_json("report.json", &v)?;
    println!("{:>8} {:>12} {:>12} {:>10}", "t", "max|res|", "signal", "zc shift");
    for r in &report.per_time {
        println!("{:>8} {:>12.4e} {:>12.4e} {:>10.4}", r.t, r.max_residual, r.signal_amplitude, r.zero_crossing_shift);
    }
    println!("signal exponent   {:.4}", report.signal_exponent);
    println!("residual exponent {:.4}", report.residual_exponent);
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(report)
}

/// Run a parsed command line. Errors carry the exit-code class.
pub fn run(cli: Cli) -> Result<()> {
    let common = cli.command.common();
    let cfg = RunConfig::load(&common.config)?;
    let run = Run::new(cfg, common.out.clone());
    match cli.command {
        Command::Scatter(_) => cmd_scatter(&run).map(|_| ()),
        Command::Asymptote { t, .. } => cmd_asymptote(&run, t),
        Command::Evolve { t_end, .. } => cmd_evolve(&run, t_end).map(|_| ()),
        Command::Compare(_) => cmd_compare(&run).map(|_| ()),
    }
}

/// 0 on success, 2 for validation problems, 3 for numerical failures.
pub fn exit_code(r: &Result<()>) -> i32 {
    match r {
        Ok(()) => 0,
        Err(e) if e.is_validation() => 2,
        Err(_) => 3,
    }
}



