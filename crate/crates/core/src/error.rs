use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("root not found in bracket: s(lo) = {s_lo:e}, s(hi) = {s_hi:e}")]
    RootNotFound { s_lo: f64, s_hi: f64 },

    #[error("invalid internal mode: {0}")]
    ModeInvalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),

    #[error("blow-up detected at t = {t}")]
    Blowup { t: f64 },

    #[error("modulation fit failed: {0}")]
    Fit(String),

    #[error("interpolation out of range: {0}")]
    Interpolation(String),

    #[error("certification failed: {0}")]
    Certification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
