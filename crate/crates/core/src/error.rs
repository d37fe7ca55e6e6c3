use thiserror::Error;

/// Errors raised across the shooting, construction, evolution and curve stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite state at x = {x} (step size too large?)")]
    NonFinite { x: f64 },

    #[error("invalid bracket: {0}")]
    BadBracket(String),

    #[error("bisection did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("profile did not decay: |u| = {residual:e} at the right end")]
    NotAdmissible { residual: f64 },

    #[error("no local extrema of theta found; domain too short")]
    NoExtrema,

    #[error("no joint node satisfies theta > theta_minus and k > 0")]
    NoJoint,

    #[error("bad node count {0}: must be a power of two consistent with the working grid")]
    BadCount(usize),

    #[error("bad profile: {0}")]
    BadProfile(String),

    #[error("spectral state became unstable at t = {t}")]
    Instability { t: f64 },

    #[error("s = {s} is not a grid node")]
    NodeMissing { s: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed input file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the batch front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadBracket(_) | Error::NoConvergence { .. } => 2,
            Error::NonFinite { .. } => 3,
            Error::NotAdmissible { .. }
            | Error::NoExtrema
            | Error::NoJoint
            | Error::BadCount(_)
            | Error::BadProfile(_)
            | Error::NodeMissing { .. } => 4,
            Error::Instability { .. } => 5,
            Error::InvalidConfig(_) => 64,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Format(_) => 74,
        }
    }
}
