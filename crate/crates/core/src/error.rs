use std::path::PathBuf;

use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("wave number {k} lies outside the feasible region (dx = {dx})")]
    Infeasible { k: Complex64, dx: f64 },

    #[error("decay rate denominator vanishes (s = {s}, k = {k}, omega = {omega})")]
    SingularDecayRate { s: f64, k: Complex64, omega: f64 },

    #[error("lattice function is not complex-differentiable at face ({i}, {j}): residual {residual:e}")]
    NotHolomorphic { i: i64, j: i64, residual: f64 },

    #[error("face ({i}, {j}) is degenerate (zero vertical gap)")]
    DegenerateFace { i: i64, j: i64 },

    #[error("non-finite state at step {step}, stage {stage}")]
    Instability { step: usize, stage: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("preflight check failed: {0}")]
    Preflight(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
