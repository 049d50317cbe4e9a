use thiserror::Error;

use crate::fit::SinusoidFit;

/// Failure of a fit that still carries its best estimate.
#[derive(Debug, Clone)]
pub struct FitFailure {
    pub message: String,
    pub best: Option<Box<SinusoidFit>>,
    pub residual_rms: f64,
}

impl std::fmt::Display for FitFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (residual rms {:.3e})",
            self.message, self.residual_rms
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical error at t = {time_ns} ns: {message}")]
    Numerical { time_ns: f64, message: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("fit error: {0}")]
    Fit(FitFailure),

    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("search error: {0}")]
    Search(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn fit(
        message: impl Into<String>,
        best: Option<SinusoidFit>,
        residual_rms: f64,
    ) -> Self {
        Error::Fit(FitFailure {
            message: message.into(),
            best: best.map(Box::new),
            residual_rms,
        })
    }

    /// Errors caused by malformed input documents or parameters.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Data(_) | Error::IndexOutOfRange { .. } | Error::Domain(_)
        )
    }

    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
