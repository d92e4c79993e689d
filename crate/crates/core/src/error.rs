use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inconsistent parameters: 4*eps*rho = {lhs} but tau0^2 - sigma0 = {rhs}")]
    InconsistentParameters { lhs: f64, rhs: f64 },
    #[error("invalid regime: {0}")]
    InvalidRegime(String),
    #[error("t = {t} is outside the time domain: {detail}")]
    OutsideTimeDomain { t: f64, detail: String },
    #[error("step too large: |tau|*dt = {0}")]
    StepTooLarge(f64),
    #[error("grid too small: {0} points, need at least 5")]
    GridTooSmall(usize),
    #[error("s = {s} is outside the domain ({lo}, {hi})")]
    OutsideDomain { s: f64, lo: f64, hi: f64 },
    #[error("unstable step: dt = {dt} exceeds {limit}")]
    UnstableStep { dt: f64, limit: f64 },
    #[error("nonpositive w = {w} at index {index}")]
    NonpositiveW { index: usize, w: f64 },
    #[error("no documented limit for {0}")]
    NoDocumentedLimit(String),
    #[error("reports are not comparable: {0}")]
    IncomparableReports(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
