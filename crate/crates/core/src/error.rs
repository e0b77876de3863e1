use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("grid mismatch: expected {expected:?}, got {actual:?}")]
    GridMismatch {
        expected: (usize, usize, usize),
        actual: (usize, usize, usize),
    },

    #[error("tuned filter must not carry a translation (b = {b:?}, tau = {tau})")]
    TranslatedFilter { b: [f64; 2], tau: f64 },

    #[error("frame range is empty")]
    EmptyFrameRange,

    #[error("frame index {index} out of range for {nt} frames")]
    FrameOutOfRange { index: usize, nt: usize },

    #[error("trajectory leaves the volume at frame {frame} (center {center:?})")]
    TrajectoryOutOfBounds { frame: usize, center: [f64; 2] },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
