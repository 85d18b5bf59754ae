//! Sampled profiles q(x): spectral derivatives, the metric m = 1 + q_x², the
//! conserved charge split c = c₊(x) + c₋(x), and the map y = x − c₊(x).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{EbError, Result};
use crate::numerics::interp::uniform_eval;
use crate::numerics::quad::cumulative_simpson;
use crate::numerics::spectral::Spectral;

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(EbError::BadParams(format!("grid needs x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < MIN_POINTS {
            return Err(EbError::BadParams(format!("grid needs n >= {MIN_POINTS}, got {n}")));
        }
        Ok(Grid { x_min, x_max, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Length of the periodised domain used for differentiation.
    pub fn period(&self) -> f64 {
        self.n as f64 * self.spacing()
    }

    /// Index of the node closest to `x` (clamped).
    pub fn nearest(&self, x: f64) -> usize {
        let u = ((x - self.x_min) / self.spacing()).round();
        u.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Gaussian,
    Sech,
    CustomSamples,
}

/// Parameters for [`build_profile`]. Analytic kinds use `amp` and `width`;
/// `custom_samples` uses `samples`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileParams {
    pub amp: f64,
    pub width: f64,
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub grid: Grid,
    pub q: Vec<f64>,
    pub q_x: Vec<f64>,
    pub q_xx: Vec<f64>,
    pub m: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargeDecomposition {
    pub c_total: f64,
    pub c_plus_of_x: Vec<f64>,
    pub c_minus_of_x: Vec<f64>,
}

/// Spectral first and second derivatives on the periodised grid.
pub fn differentiate(q: &[f64], grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let s = Spectral::new(grid.n, grid.spacing());
    s.derivatives(q)
}

impl Profile {
    /// Wrap samples, filling derivatives and metric, and check the tails.
    pub fn from_samples(grid: Grid, q: Vec<f64>, tail_tol: f64) -> Result<Self> {
        if q.len() != grid.n {
            return Err(EbError::BadParams(format!("{} samples for a grid of {}", q.len(), grid.n)));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(EbError::BadParams("non-finite sample".into()));
        }
        // Differentiation periodises the data, so a non-decaying profile has
        // to be caught on the raw samples: a one-sided difference at each end.
        let h = grid.spacing();
        let n = grid.n;
        let left = ((q[1] - q[0]) / h).abs();
        let right = ((q[n - 1] - q[n - 2]) / h).abs();
        let (q_x, q_xx) = differentiate(&q, &grid);
        let l = left.max(q_x[0].abs());
        let r = right.max(q_x[n - 1].abs());
        if l >= tail_tol {
            return Err(EbError::TailNotDecayed { end: "left", value: l, tol: tail_tol });
        }
        if r >= tail_tol {
            return Err(EbError::TailNotDecayed { end: "right", value: r, tol: tail_tol });
        }
        let m = q_x.iter().map(|d| 1.0 + d * d).collect();
        Ok(Profile { grid, q, q_x, q_xx, m })
    }

    pub fn zero(grid: Grid) -> Self {
        let n = grid.n;
        Profile {
            grid,
            q: vec![0.0; n],
            q_x: vec![0.0; n],
            q_xx: vec![0.0; n],
            m: vec![1.0; n],
        }
    }

    /// √m − 1, evaluated without cancellation.
    pub fn charge_density(&self) -> Vec<f64> {
        self.q_x
            .iter()
            .zip(&self.m)
            .map(|(d, m)| d * d / (m.sqrt() + 1.0))
            .collect()
    }

    pub fn to_csv(&self, provenance: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(p) = provenance {
            let _ = writeln!(out, "# {p}");
        }
        out.push_str("x,q\n");
        for (i, q) in self.q.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.grid.x(i), q);
        }
        out
    }
}

/// Parse `x,q` CSV text (header required, `#` lines ignored). The abscissae
/// must be uniform; they define the returned grid.
pub fn read_csv_samples(text: &str) -> Result<(Grid, Vec<f64>)> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some(h) if h.replace(' ', "") == "x,q" => {}
        other => return Err(EbError::BadParams(format!("expected header `x,q`, got {other:?}"))),
    }
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.map(str::trim)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| EbError::BadParams(format!("bad CSV row {}: {line}", k + 2)))
        };
        xs.push(parse(it.next())?);
        qs.push(parse(it.next())?);
    }
    let n = xs.len();
    let grid = Grid::new(*xs.first().unwrap_or(&0.0), *xs.last().unwrap_or(&0.0), n)?;
    let h = grid.spacing();
    if xs.iter().enumerate().any(|(i, x)| (x - grid.x(i)).abs() > 1e-9 * h.max(1.0) + 1e-6 * h) {
        return Err(EbError::BadParams("custom samples must lie on a uniform grid".into()));
    }
    Ok((grid, qs))
}

pub fn build_profile(kind: ProfileKind, params: &ProfileParams, grid: Grid, tail_tol: f64) -> Result<Profile> {
    let q: Vec<f64> = match kind {
        ProfileKind::Gaussian | ProfileKind::Sech => {
            if !(params.width > 0.0) || !params.width.is_finite() {
                return Err(EbError::BadParams(format!("width must be positive, got {}", params.width)));
            }
            if !params.amp.is_finite() {
                return Err(EbError::BadParams("amplitude must be finite".into()));
            }
            let (a, w) = (params.amp, params.width);
            grid.points()
                .into_iter()
                .map(|x| match kind {
                    ProfileKind::Gaussian => a * (-(x / w).powi(2)).exp(),
                    _ => a / (x / w).cosh(),
                })
                .collect()
        }
        ProfileKind::CustomSamples => match &params.samples {
            Some(s) if s.len() == grid.n => s.clone(),
            Some(s) => {
                return Err(EbError::BadParams(format!("{} custom samples for a grid of {}", s.len(), grid.n)))
            }
            None => return Err(EbError::BadParams("custom_samples needs samples".into())),
        },
    };
    if params.amp == 0.0 && kind != ProfileKind::CustomSamples {
        return Ok(Profile::zero(grid));
    }
    Profile::from_samples(grid, q, tail_tol)
}

/// c₊(x) = ∫_x^∞ (√m − 1), c₋(x) = ∫_{−∞}^x (√m − 1), both from one running
/// Simpson integral, so c₊ + c₋ = c exactly and c₊ is non-increasing.
pub fn charges(p: &Profile) -> ChargeDecomposition {
    let run = cumulative_simpson(&p.charge_density(), p.grid.spacing());
    let c_total = *run.last().unwrap_or(&0.0);
    let c_plus_of_x = run.iter().map(|c| c_total - c).collect();
    ChargeDecomposition {
        c_total,
        c_plus_of_x,
        c_minus_of_x: run,
    }
}

/// y = x − c₊(x).
pub fn y_of_x(p: &Profile, ch: &ChargeDecomposition, x: f64) -> Result<f64> {
    let g = &p.grid;
    if !g.contains(x) {
        return Err(EbError::OutOfDomain { x, lo: g.x_min, hi: g.x_max });
    }
    Ok(x - uniform_eval(g.x_min, g.spacing(), &ch.c_plus_of_x, x))
}
