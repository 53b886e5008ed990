use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expected edge count {expected:.3e} exceeds configured cap {cap:.3e}")]
    EdgeCapExceeded { expected: f64, cap: f64 },

    #[error("critical scale is undefined: community {community} has p = 0 with {n} nodes")]
    CriticalScaleUndefined { community: usize, n: u64 },

    #[error("strategy selected community {community} with an empty frontier at step {t}")]
    InfeasibleStrategy { community: usize, t: u64 },

    #[error("balance curve is undefined for alpha1 = {alpha1} > 1")]
    CurveUndefined { alpha1: f64 },

    #[error("x1 = {x1} lies outside the balance-curve domain [{lo}, {hi}]")]
    OutsideCurveDomain { x1: f64, lo: f64, hi: f64 },

    #[error("curve samples must start at (0, 0) and be non-decreasing in both coordinates")]
    NonMonotoneCurve,

    #[error("schedule construction failed: {0}")]
    ScheduleConstruction(String),

    #[error("tail bound '{direction}' is inconsistent with k = {k} vs mean = {mean}")]
    BoundDirection {
        direction: &'static str,
        k: f64,
        mean: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
