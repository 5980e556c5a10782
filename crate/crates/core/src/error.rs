use std::path::PathBuf;

/// Errors produced by the dii pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: unsupported raster format (expected binary PGM or PNG)")]
    UnsupportedFormat { path: PathBuf },

    #[error("{path}: corrupt header: {reason}")]
    CorruptHeader { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: invalid world file: {reason}")]
    WorldFile { path: PathBuf, reason: String },

    #[error("invalid raster dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: {}x{} vs {}x{}", .left.0, .left.1, .right.0, .right.1)]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("length mismatch: {left} vs {right} elements")]
    LengthMismatch { left: usize, right: usize },

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("EmptyReference: the before mask has no feature pixels, so the region mean in the DII denominator is zero")]
    EmptyReference,

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("{path}: malformed impact table: {reason}")]
    ImpactTable { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the analysis itself rather than of its inputs.
    pub fn is_domain_error(&self) -> bool {
        matches!(self, Error::EmptyReference)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
