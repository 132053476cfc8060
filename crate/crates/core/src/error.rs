//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A volume was constructed or requested with a zero-sized dimension or
    /// non-positive spacing.
    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    /// Two inputs that must live on the same voxel grid do not.
    #[error("geometry mismatch: {context}: {left} vs {right}")]
    GeometryMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    /// Array shapes are incompatible (channel counts, map sizes, weight lengths).
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A voxel or pixel index is outside the grid.
    #[error("index out of bounds: {index:?} not inside dims {dims:?}")]
    IndexOutOfBounds {
        index: (usize, usize, usize),
        dims: (usize, usize, usize),
    },

    /// Non-finite values where finite ones are required.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// E-step denominator vanished at a voxel: no label hypothesis has
    /// positive mass there.
    #[error("degenerate voxel {index}: posterior denominator is zero")]
    DegenerateVoxel { index: usize },

    /// M-step denominator vanished for a truth label (no posterior mass
    /// anywhere), so its confusion column cannot be re-estimated.
    #[error("absent label {label}: no posterior mass, confusion column cannot be updated")]
    AbsentLabel { label: u8 },

    /// Both masks empty, or a requested surface does not exist.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A phantom spec is internally inconsistent.
    #[error("phantom spec error: {0}")]
    PhantomSpec(String),

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),

    /// A volume file that does not follow the VFV1 layout.
    #[error("format error in {path}: {reason} (byte offset {offset})")]
    Format {
        path: PathBuf,
        reason: String,
        offset: u64,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, offset: u64, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
            offset,
        }
    }
}
