//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape {dims:?}: {reason}")]
    InvalidShape {
        dims: Vec<usize>,
        reason: &'static str,
    },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("window {tau} invalid for mode {mode} of length {len} (need 1 <= tau <= len)")]
    InvalidWindow { mode: usize, tau: usize, len: usize },

    #[error("rank {rank} invalid for mode {mode}: {reason}")]
    InvalidRank {
        mode: usize,
        rank: usize,
        reason: String,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("rank schedule exhausted: every mode is at its final rank")]
    ScheduleExhausted,

    #[error(
        "embedded tensor would hold {elements} elements ({factor:.1}x expansion), above the cap of {cap}"
    )]
    TooLarge {
        elements: u128,
        cap: u128,
        factor: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidShape { .. } => "invalid-shape",
            Error::ShapeMismatch { .. } => "shape-mismatch",
            Error::ModeOutOfRange { .. } => "mode-out-of-range",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::InvalidWindow { .. } => "invalid-window",
            Error::InvalidRank { .. } => "invalid-rank",
            Error::NonFinite(_) => "non-finite",
            Error::ScheduleExhausted => "schedule-exhausted",
            Error::TooLarge { .. } => "too-large",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }
}
