use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout error: {0}")]
    Layout(String),

    #[error("glyph atlas has no bitmap for {0:?}")]
    UnknownGlyph(char),

    #[error("layout generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("duration percentage must be nonnegative, got {0}")]
    Domain(f64),

    #[error("fixation {index} at ({x}, {y}) lies outside the {width}x{height} page")]
    FixationOutOfBounds {
        index: usize,
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite loss at step {step}: d_loss={d_loss}, g_loss={g_loss}")]
    NonFiniteLoss { step: usize, d_loss: f64, g_loss: f64 },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("cannot compare histograms: {0}")]
    UndefinedDivergence(String),

    #[error("failed to load {path}: {reason}")]
    Load { path: PathBuf, reason: String },

    #[error(transparent)]
    Tensor(#[from] candle_core::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn load(path: impl Into<PathBuf>, reason: impl std::fmt::Display) -> Self {
        Error::Load {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}
