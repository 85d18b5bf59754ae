//! Run configuration: one TOML file drives every subcommand.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::asymptotics::AsymptoticOptions;
use crate::error::{EbError, Result};
use crate::pdesolver::PdeOptions;
use crate::phase::CoordinateMode;
use crate::profile::{build_profile, read_csv_samples, Grid, Profile, ProfileKind, ProfileParams};
use crate::scattering::{JostOptions, SweepOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    pub kind: ProfileKind,
    pub amp: f64,
    pub width: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub tail_tol: f64,
    /// CSV with header `x,q`, used by `custom_samples`. Relative paths are
    /// resolved against the config file's directory.
    pub samples_csv: Option<PathBuf>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection {
            kind: ProfileKind::Gaussian,
            amp: 0.1,
            width: 2.0,
            x_min: -40.0,
            x_max: 40.0,
            n: 2048,
            tail_tol: 1e-10,
            samples_csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringSection {
    pub lambda_max: f64,
    /// Nodes per half line; the sweep uses twice this many.
    pub n_lambda: usize,
    pub unitarity_tol: f64,
    pub a_floor: f64,
    pub ode_tol: f64,
}

impl Default for ScatteringSection {
    fn default() -> Self {
        ScatteringSection { lambda_max: 16.0, n_lambda: 240, unitarity_tol: 1e-6, a_floor: 0.05, ode_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsSection {
    pub coordinate_mode: CoordinateMode,
    pub n_sim: f64,
    /// x/t window used by `asymptote` and `compare`.
    pub window: [f64; 2],
    /// Points per slice written by `asymptote`.
    pub n_x: usize,
}

impl Default for AsymptoticsSection {
    fn default() -> Self {
        AsymptoticsSection { coordinate_mode: CoordinateMode::XBased, n_sim: 25.0, window: [2.0, 4.0], n_x: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub ode_tol: f64,
    pub wake_tol: f64,
    pub snapshot_times: Vec<f64>,
}

impl Default for PdeSection {
    fn default() -> Self {
        // The right end is far out: the nonlinearity feeds short waves that
        // travel at 3k² and would otherwise wrap around by t = 160.
        PdeSection {
            x_min: -300.0,
            x_max: 13700.0,
            n: 32768,
            ode_tol: 1e-10,
            wake_tol: 1e-8,
            snapshot_times: vec![20.0, 40.0, 80.0, 160.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Any of "json" and "csv".
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: PathBuf::from("out"), formats: vec!["json".into(), "csv".into()] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSection,
    pub scattering: ScatteringSection,
    pub asymptotics: AsymptoticsSection,
    pub pde: PdeSection,
    pub output: OutputSection,
    /// Directory of the config file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn bad(msg: impl Into<String>) -> EbError {
    EbError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.profile;
        let s = &self.scattering;
        let a = &self.asymptotics;
        let d = &self.pde;
        let positive = [
            ("profile.tail_tol", p.tail_tol),
            ("scattering.unitarity_tol", s.unitarity_tol),
            ("scattering.a_floor", s.a_floor),
            ("scattering.ode_tol", s.ode_tol),
            ("asymptotics.n_sim", a.n_sim),
            ("pde.ode_tol", d.ode_tol),
            ("pde.wake_tol", d.wake_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{name} must be positive, got {v}")));
            }
        }
        if p.kind != ProfileKind::CustomSamples {
            if !(p.width > 0.0) || !p.amp.is_finite() {
                return Err(bad("profile.width must be positive and profile.amp finite"));
            }
            if !(p.x_min < p.x_max) || p.n < 16 {
                return Err(bad("profile grid needs x_min < x_max and n ≥ 16"));
            }
        } else if p.samples_csv.is_none() {
            return Err(bad("custom_samples requires profile.samples_csv"));
        }
        if !(s.lambda_max > 1.0) || s.n_lambda < 8 {
            return Err(bad("scattering.lambda_max must exceed 1 and n_lambda be at least 8"));
        }
        if !(a.window[0] > 0.0 && a.window[0] < a.window[1]) || a.n_x < 2 {
            return Err(bad("asymptotics.window must satisfy 0 < lo < hi and n_x ≥ 2"));
        }
        if !(d.x_min < d.x_max) || d.n < 16 {
            return Err(bad("pde grid needs x_min < x_max and n ≥ 16"));
        }
        if d.snapshot_times.is_empty()
            || d.snapshot_times[0] <= 0.0
            || d.snapshot_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(bad("pde.snapshot_times must be positive and strictly increasing"));
        }
        if self.output.formats.is_empty() || self.output.formats.iter().any(|f| f != "json" && f != "csv") {
            return Err(bad("output.formats must be a non-empty subset of [\"json\", \"csv\"]"));
        }
        Ok(())
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }

    /// SHA-256 of the canonical JSON form of everything that affects results.
    /// The output section is left out so `--out` does not change the hash.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("output");
        }
        if let Some(path) = &self.profile.samples_csv {
            // Hash the sample data, not where it lives.
            let data = std::fs::read(self.base_dir.join(path)).unwrap_or_default();
            v["profile"]["samples_csv"] = serde_json::Value::String(hex::encode(Sha256::digest(&data)));
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }

    fn samples(&self) -> Result<(Grid, Vec<f64>)> {
        let path = self.base_dir.join(self.profile.samples_csv.as_ref().expect("validated"));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| bad(format!("cannot read samples {}: {e}", path.display())))?;
        read_csv_samples(&text)
    }

    /// Initial profile on the scattering grid.
    pub fn profile(&self) -> Result<Profile> {
        let p = &self.profile;
        if p.kind == ProfileKind::CustomSamples {
            let (grid, q) = self.samples()?;
            return Profile::from_samples(grid, q, p.tail_tol);
        }
        let grid = Grid::new(p.x_min, p.x_max, p.n)?;
        build_profile(p.kind, &ProfileParams { amp: p.amp, width: p.width, samples: None }, grid, p.tail_tol)
    }

    /// Initial profile on the (much larger) PDE grid. Custom samples are
    /// interpolated inside their range and set to zero outside it.
    pub fn pde_profile(&self) -> Result<Profile> {
        let d = &self.pde;
        let grid = Grid::new(d.x_min, d.x_max, d.n)?;
        let p = &self.profile;
        if p.kind == ProfileKind::CustomSamples {
            let (g, q) = self.samples()?;
            let vals: Vec<f64> = grid
                .points()
                .iter()
                .map(|&x| {
                    if g.contains(x) {
                        crate::numerics::interp::uniform_eval(g.x_min, g.spacing(), &q, x)
                    } else {
                        0.0
                    }
                })
                .collect();
            return Profile::from_samples(grid, vals, p.tail_tol);
        }
        build_profile(p.kind, &ProfileParams { amp: p.amp, width: p.width, samples: None }, grid, p.tail_tol)
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions { jost: JostOptions { tol: self.scattering.ode_tol }, a_floor: self.scattering.a_floor }
    }

    pub fn asymptotic_options(&self, c_total: f64) -> AsymptoticOptions {
        AsymptoticOptions {
            mode: self.asymptotics.coordinate_mode,
            n_sim: self.asymptotics.n_sim,
            c_total,
            ..AsymptoticOptions::default()
        }
    }

    pub fn pde_options(&self) -> PdeOptions {
        PdeOptions { ode_tol: self.pde.ode_tol, wake_tol: self.pde.wake_tol, ..PdeOptions::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.pde.n, 32768);
    }

    #[test]
    fn shipped_sample_is_the_default() {
        let c = RunConfig::from_toml(include_str!("../../../run.toml")).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn sections_parse() {
        let c = RunConfig::from_toml(
            "[profile]\nkind = \"sech\"\namp = 0.2\n[asymptotics]\ncoordinate_mode = \"y_based\"\n[pde]\nsnapshot_times = [1.0, 2.0]\n",
        )
        .unwrap();
        assert_eq!(c.profile.kind, ProfileKind::Sech);
        assert_eq!(c.asymptotics.coordinate_mode, CoordinateMode::YBased);
        assert_eq!(c.pde.snapshot_times, vec![1.0, 2.0]);
    }

    #[test]
    fn invalid_values_rejected() {
        for text in [
            "[scattering]\nlambda_max = 0.5\n",
            "[pde]\nsnapshot_times = [2.0, 1.0]\n",
            "[pde]\node_tol = 0.0\n",
            "[profile]\nbogus = 1\n",
            "[output]\nformats = [\"png\"]\n",
            "[profile]\nkind = \"custom_samples\"\n",
        ] {
            let e = RunConfig::from_toml(text).unwrap_err();
            assert!(e.is_validation(), "{text}");
        }
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output.directory = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.profile.amp = 0.2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
