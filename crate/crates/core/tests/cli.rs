//! The `eb` binary end to end: outputs, provenance and exit codes.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL_PDE: &str = "[pde]\nx_min = -64.0\nx_max = 4031.75\nn = 16384\nsnapshot_times = [5.0, 10.0]\n";

fn eb(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eb"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn setup(config: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    (dir, cfg)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = eb(&["scatter"], &dir.path().join("absent.toml"), dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_arguments_and_config() {
    let (dir, cfg) = setup("[profile]\nwidht = 2.0\n");
    assert_eq!(eb(&["scatter"], &cfg, dir.path()).status.code(), Some(2));
    let (dir, cfg) = setup("");
    // --t is required.
    assert_eq!(eb(&["asymptote"], &cfg, dir.path()).status.code(), Some(2));
    assert_eq!(eb(&["asymptote", "--t", "-1"], &cfg, dir.path()).status.code(), Some(2));
}

#[test]
fn window_outside_similarity_region() {
    let (dir, cfg) = setup("[asymptotics]\nwindow = [0.01, 4.0]\n");
    let o = eb(&["asymptote", "--t", "80"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("similarity window"));
}

#[test]
fn zero_profile_scatters_to_zero() {
    let (dir, cfg) = setup("[profile]\namp = 0.0\n");
    let o = eb(&["scatter"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("scattering.json"));
    assert!(v["r_re"].as_array().unwrap().iter().chain(v["r_im"].as_array().unwrap()).all(|x| x.as_f64() == Some(0.0)));
    assert_eq!(v["meta"]["config_sha256"].as_str().unwrap().len(), 64);
    assert!(String::from_utf8_lossy(&o.stdout).contains("unitarity worst case"));
}

#[test]
fn large_data_trips_the_a_floor() {
    let (dir, cfg) = setup("[profile]\namp = 100.0\nn = 8192\n");
    let o = eb(&["scatter"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("a_floor") && err.contains("amp"), "{err}");
    assert!(!dir.path().join("scattering.json").exists());
}

#[test]
fn asymptote_writes_slice_and_sidecar() {
    let (dir, cfg) = setup("[asymptotics]\nn_x = 101\n");
    let o = eb(&["asymptote", "--t", "80"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("asymptote_t80.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# eb asymptote config_sha256="));
    assert_eq!(lines.next().unwrap(), "x,t,q_asym,amplitude,phase");
    assert_eq!(lines.count(), 101);
    let side = json(&dir.path().join("asymptote_t80.json"));
    for key in ["arg_gamma", "arg_rbar", "log_integral", "delta1_term", "theta_phase", "kappa"] {
        assert_eq!(side[key].as_array().unwrap().len(), 101, "{key}");
    }
}

#[test]
fn evolve_snapshots_and_wake_failure() {
    let (dir, cfg) = setup(SMALL_PDE);
    let o = eb(&["evolve", "--t-end", "7"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for t in ["5", "7"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("snapshot_t{t}.csv"))).unwrap();
        assert!(csv.starts_with("# eb evolve config_sha256="));
        assert_eq!(csv.lines().nth(1), Some("x,q"));
    }
    let meta = json(&dir.path().join("evolve.json"));
    assert_eq!(meta["snapshots"].as_array().unwrap().len(), 2);
    assert!(meta["snapshots"][1]["drift"].as_f64().unwrap() < 1e-6);

    let (dir, cfg) = setup("[pde]\nx_min = -64.0\nx_max = 448.0\nn = 4096\n");
    let o = eb(&["evolve", "--t-end", "10"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("enlarge the domain"));
}

#[test]
fn compare_report_and_cached_scattering() {
    let (dir, cfg) = setup(SMALL_PDE);
    let fresh = dir.path().join("fresh");
    let o = eb(&["compare"], &cfg, &fresh);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&fresh.join("report.json"));
    for key in ["signal_exponent", "residual_exponent", "times", "residuals", "config_sha256"] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert_eq!(v["times"], serde_json::json!([5.0, 10.0]));
    let overlay = std::fs::read_to_string(fresh.join("overlay_t10.csv")).unwrap();
    assert_eq!(overlay.lines().nth(1), Some("x,q_num,q_asym,residual"));

    // A compare that picks up a saved scattering.json gives the same bytes.
    let cached = dir.path().join("cached");
    assert_eq!(eb(&["scatter"], &cfg, &cached).status.code(), Some(0));
    assert_eq!(eb(&["compare"], &cfg, &cached).status.code(), Some(0));
    assert_eq!(std::fs::read(fresh.join("report.json")).unwrap(), std::fs::read(cached.join("report.json")).unwrap());
}

#[test]
fn compare_on_zero_data_has_zero_residual() {
    let (dir, cfg) = setup(&format!("[profile]\namp = 0.0\n{SMALL_PDE}"));
    let o = eb(&["compare"], &cfg, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&dir.path().join("report.json"));
    assert!(v["residuals"].as_array().unwrap().iter().all(|r| r.as_f64() == Some(0.0)));
}

#[test]
fn json_only_output_skips_csv() {
    let (dir, cfg) = setup("[asymptotics]\nn_x = 11\n[output]\nformats = [\"json\"]\n");
    assert_eq!(eb(&["asymptote", "--t", "40"], &cfg, dir.path()).status.code(), Some(0));
    assert!(dir.path().join("asymptote_t40.json").exists());
    assert!(!dir.path().join("asymptote_t40.csv").exists());
}
