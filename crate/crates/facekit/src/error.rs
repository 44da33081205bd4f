//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Error`]. The CLI maps
//! errors onto process exit codes through [`Error::exit_code`]: data problems
//! in an input stream or file are distinct from configuration mistakes, which
//! are distinct from numeric divergence during training.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// Expression weights outside the admissible range.
    #[error("weight constraint violated: {detail}")]
    ConstraintViolation { detail: String },

    /// A vector or matrix had the wrong number of entries.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Malformed text input. `column` is the 1-based field index.
    #[error("parse error at line {line}, field {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    /// Shapes in a basis disagree on vertex count.
    #[error("shape {shape} has {got} vertices, expected {expected}")]
    TopologyMismatch {
        shape: usize,
        expected: usize,
        got: usize,
    },

    /// Smoothing kernel parameters that do not define a solvable fit.
    #[error("invalid smoothing kernel: {msg}")]
    InvalidKernel { msg: String },

    /// A windowed operation was asked to run before enough samples arrived.
    #[error("window not full: have {have} of {need} samples")]
    WindowNotFull { have: usize, need: usize },

    /// Innovation covariance collapsed to zero; the update is undefined.
    #[error("degenerate innovation covariance: filter cannot update")]
    DegenerateInnovation,

    /// Softmax temperature must be strictly positive.
    #[error("temperature must be positive, got {got}")]
    InvalidTemperature { got: f64 },

    /// Frame indices in a stream must be strictly increasing.
    #[error("frame index not increasing: {got} after {prev}")]
    NonMonotoneFrame { prev: u64, got: u64 },

    /// A frame arrived with a different channel layout than the stream declared.
    #[error("channel count mismatch for {what}: expected {expected}, got {got}")]
    ChannelCountMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Two series that must align frame-for-frame have different lengths.
    #[error("stream length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Bad key, value, or combination in a configuration source.
    #[error("invalid configuration: {msg}")]
    InvalidConfig { msg: String },

    /// Training produced a non-finite loss.
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code for command-line reporting.
    ///
    /// 1 = bad input data, 2 = bad configuration or usage, 3 = training
    /// divergence. Success is 0 and never reaches this function.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite { .. }
            | Error::ConstraintViolation { .. }
            | Error::Parse { .. }
            | Error::TopologyMismatch { .. }
            | Error::NonMonotoneFrame { .. }
            | Error::ChannelCountMismatch { .. }
            | Error::LengthMismatch { .. }
            | Error::Io(_) => 1,
            Error::DimensionMismatch { .. }
            | Error::InvalidKernel { .. }
            | Error::WindowNotFull { .. }
            | Error::DegenerateInnovation
            | Error::InvalidTemperature { .. }
            | Error::InvalidConfig { .. } => 2,
            Error::Divergence { .. } => 3,
        }
    }
}
