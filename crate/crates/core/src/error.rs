use thiserror::Error;

/// Errors produced by the simulator and its experiment runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {what} (expected {expected}, got {actual})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("signal too short: need at least {required} samples, got {actual}")]
    SignalTooShort { required: usize, actual: usize },

    #[error("band [{low}, {high}] Hz exceeds the estimate span [{span_low}, {span_high}] Hz")]
    BandOutOfRange {
        low: f64,
        high: f64,
        span_low: f64,
        span_high: f64,
    },

    #[error("adjacent-band power is zero; the ratio is above the measurable floor")]
    ZeroAdjacentPower,

    #[error("channel for user {user} is identically zero")]
    ZeroChannel { user: usize },

    #[error("terminal at ({x}, {y}) coincides with scatterer {scatterer}")]
    CoincidentTerminal { x: f64, y: f64, scatterer: usize },

    #[error(
        "target ACLR {target:.2} dB is outside the calibration bracket \
         [{worst:.2}, {best:.2}] dB"
    )]
    CalibrationBracket { target: f64, best: f64, worst: f64 },

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user-supplied configuration rather than by
    /// the computation itself.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Json(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
