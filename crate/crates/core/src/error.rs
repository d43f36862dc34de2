use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("no interior minimum in bracket [{lo}, {hi}]: {reason}")]
    Bracket { lo: f64, hi: f64, reason: String },

    #[error("degenerate energy denominator: {0}")]
    Degeneracy(String),

    #[error("step size underflow at t = {t} (h = {h:e}); the problem may be stiff")]
    Stiffness { t: f64, h: f64 },

    #[error("numerical health check failed: {0}")]
    NumericalHealth(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
