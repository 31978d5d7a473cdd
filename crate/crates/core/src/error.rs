//! Error type shared across the simulation crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The geometric pass series diverges for reflection amplitudes >= 1.
    #[error("multipass series diverges: reflection amplitude must be < 1 (got {0})")]
    DivergentSeries(f64),

    /// A closed form was requested outside its regime of validity.
    #[error("outside model validity: {0}")]
    RegimeViolation(String),

    /// A sweep point would land outside the low-pass filter passband.
    #[error("sweep point aliases: {0}")]
    Alias(String),

    /// The baseband frame is too short for the requested analysis.
    #[error("frame too short: {0}")]
    FrameTooShort(String),

    /// A band query fell outside the spectrum's span.
    #[error("band outside spectrum span: {0}")]
    OutOfSpan(String),

    /// Sweep data is degenerate (no identifiable resonance peak).
    #[error("no peak in sweep data: {0}")]
    NoPeak(String),

    /// A per-point failure inside a sweep, tagged with the point index.
    #[error("sweep point {index}: {source}")]
    SweepPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}
