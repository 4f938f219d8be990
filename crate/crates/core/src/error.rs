use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("separation detected: fitted probabilities reached the boundary ({units} units)")]
    SeparationDetected { units: usize },

    #[error("singular hessian")]
    SingularHessian,

    #[error("design matrix is rank deficient")]
    RankDeficientX,

    #[error("degenerate variance at unit {unit} (sigma2 = {value:e})")]
    DegenerateVariance { unit: usize, value: f64 },

    #[error("degenerate standard error for index {index}")]
    DegenerateSigma { index: usize },

    #[error("malformed input in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
