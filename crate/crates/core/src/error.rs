use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed PPM stream: {0}")]
    Ppm(String),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed tensor file: {0}")]
    Tensor(String),

    #[error("unsupported tensor format version {0}")]
    TensorVersion(u8),

    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("quality factor {0} is outside [1, 100]")]
    QualityFactor(i64),

    #[error("invalid selection: {0}")]
    Selection(String),

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("expected {expected}-domain coefficients, got {found}-domain")]
    Domain {
        expected: &'static str,
        found: &'static str,
    },

    #[error("planes are already {0}")]
    ShiftState(&'static str),

    #[error("layout mismatch: {0}")]
    Layout(String),

    #[error("network spec: {0}")]
    NetSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from caller-supplied options rather than from
    /// the data being processed.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::QualityFactor(_)
                | Error::Selection(_)
                | Error::UnknownPreset(_)
                | Error::Config(_)
        )
    }
}
