//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NlsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument {value} outside the domain [{min}, {max}]")]
    OutOfDomain { value: f64, min: f64, max: f64 },
    #[error("negative argument {0}")]
    NegativeArgument(f64),
    #[error("no kink: {0}")]
    NoKink(String),
    #[error("profile truncated: boundary value {boundary:e} exceeds {threshold:e}")]
    Truncation { boundary: f64, threshold: f64 },
    #[error("no ground state: {0}")]
    NoGroundState(String),
    #[error("shooting integrator blew up: {0}")]
    BlowupInShooting(String),
    #[error("first integral negative (H = {value:e} at phi = {phi})")]
    FirstIntegralNegative { value: f64, phi: f64 },
    #[error("kink speed |c| = {0} is not below the speed of sound sqrt(2)")]
    SpeedAboveSound(f64),
    #[error("numerical blowup at t = {time}")]
    NumericalBlowup { time: f64 },
    #[error("boundary contamination at t = {time}: boundary/peak = {ratio:e}")]
    BoundaryContamination { time: f64, ratio: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("infinite train must be truncated before realization")]
    InfiniteTrain,
    #[error("format error: {0}")]
    Format(String),
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<NlsError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NlsError {
    /// Wraps the error with a short description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        NlsError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &NlsError {
        match self {
            NlsError::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, NlsError>;
