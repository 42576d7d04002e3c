use std::io;
use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// Malformed file contents (PLY, PNM, pose, intrinsics, config ...).
    #[error("malformed {what}{}: {detail}", path_suffix(.path))]
    Format {
        what: &'static str,
        path: Option<PathBuf>,
        detail: String,
    },

    /// A constructor invariant was violated.
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("label out of range: {value} (classes: {limit}, ignore: {ignore})")]
    LabelOutOfRange { value: u32, limit: u32, ignore: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pose not rigid: {0}")]
    PoseNotRigid(String),

    #[error("missing frame {index}: {path}")]
    MissingFrame { index: u32, path: PathBuf },

    #[error("mask is empty")]
    EmptyMask,

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

fn path_suffix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!(" at {}", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn format(what: &'static str, path: Option<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format { what, path, detail: detail.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
