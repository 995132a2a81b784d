use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rule domain exceeded at k={0}")]
    RuleDomain(u64),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("per-step regime: f(z)={c} is not below current time {t}")]
    PerStepRegime { c: f64, t: u64 },
    #[error("N={n} exceeds the reference generator limit {limit}")]
    TooLarge { n: u64, limit: u64 },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("exploration died out")]
    DiedOut,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
