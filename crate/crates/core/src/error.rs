use thiserror::Error;

use crate::numerics::ode::OdeError;

/// Everything the pipeline can refuse or fail on.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EbError {
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("profile tail not decayed at {end} end: |q_x| = {value:e} >= tail_tol = {tol:e}")]
    TailNotDecayed { end: &'static str, value: f64, tol: f64 },
    #[error("x = {x} outside the grid [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("|lambda| = {lambda} exceeds the small-lambda range {max}")]
    OutOfRange { lambda: f64, max: f64 },
    #[error("Jost integration failed at lambda = {lambda}: {source}")]
    NonConvergence { lambda: f64, source: OdeError },
    #[error("min |a| = {min_abs_a:.4} below a_floor = {a_floor} (possible discrete spectrum); reduce the amplitude")]
    AssumptionViolated { min_abs_a: f64, a_floor: f64 },
    #[error("spectral sweep [{lo}, {hi}] does not cover the required range [{need_lo}, {need_hi}]")]
    RangeTooNarrow { lo: f64, hi: f64, need_lo: f64, need_hi: f64 },
    #[error("lambda = {lambda_re}{lambda_im:+}i lies on the integration rays")]
    OnContour { lambda_re: f64, lambda_im: f64 },
    #[error("ratio {ratio} outside the similarity window [{lo}, {hi}]")]
    RegionViolation { ratio: f64, lo: f64, hi: f64 },
    #[error("reflection coefficient vanishes at the stationary point")]
    DegenerateReflection,
    #[error("not available: {0}")]
    NotAvailable(String),
    #[error("dispersive wake reached the domain boundary at t = {t} (|q| = {value:e} > wake_tol = {tol:e}); enlarge the domain")]
    WakeReachedBoundary { t: f64, value: f64, tol: f64 },
    #[error("time step underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("unitarity defect {defect:e} exceeds unitarity_tol = {tol:e}")]
    UnitarityDefect { defect: f64, tol: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl EbError {
    /// Input and configuration problems, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            EbError::BadParams(_)
                | EbError::TailNotDecayed { .. }
                | EbError::OutOfDomain { .. }
                | EbError::OutOfRange { .. }
                | EbError::RegionViolation { .. }
                | EbError::Config(_)
                | EbError::Io(_)
        )
    }
}

impl From<std::io::Error> for EbError {
    fn from(e: std::io::Error) -> Self {
        EbError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, EbError>;
