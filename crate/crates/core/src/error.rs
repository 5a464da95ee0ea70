//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A geometry or configuration parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An element index fell outside the array.
    #[error("element index ({m},{n}) out of range for a {rows}x{cols} array (1-based)")]
    IndexOutOfRange {
        m: usize,
        n: usize,
        rows: usize,
        cols: usize,
    },

    /// A requested first-harmonic amplitude exceeds what 1-bit switching can produce.
    #[error("target amplitude {requested:.6} exceeds the maximum first-harmonic amplitude {max:.6}")]
    InfeasibleAmplitude { requested: f64, max: f64 },

    /// Bit count does not divide into whole symbols.
    #[error("bit count {bits} is not divisible by {bits_per_symbol} bits per symbol")]
    Framing { bits: usize, bits_per_symbol: usize },

    /// Sample rate is not an integer multiple of the control-clock rate.
    #[error("sample rate {sample_rate} Hz is not an integer multiple of the control clock rate {clock_rate} Hz")]
    RateMismatch { sample_rate: f64, clock_rate: f64 },

    /// Not enough samples for the requested spectral estimate.
    #[error("need at least {needed} samples for the requested estimate, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// Frame synchronization did not find a credible correlation peak.
    #[error("frame sync failed: peak-to-sidelobe ratio {ratio:.2} below threshold {threshold:.2}")]
    SyncFailure { ratio: f64, threshold: f64 },

    /// Pilot symbols carry no energy, so no channel gain can be estimated.
    #[error("equalization failed: pilot sequence has zero energy")]
    ZeroPilotEnergy,

    /// Two sequences that must be aligned have different lengths.
    #[error("length mismatch: {left} vs {right} ({context})")]
    LengthMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// A schedule file could not be parsed.
    #[error("schedule parse error at line {line}: {message}")]
    ScheduleParse { line: usize, message: String },

    /// A schedule's tick frames are not a consistent joint space-time coding.
    #[error("schedule inconsistent at tick {tick} (symbol {symbol}): frame is neither the base pattern nor its complement")]
    ScheduleInconsistent { tick: usize, symbol: usize },

    /// I/O error while reading or writing files.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
