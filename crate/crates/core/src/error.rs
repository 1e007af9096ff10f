use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },

    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("`{key}`: cannot parse `{value}` as {expected}")]
    Malformed {
        key: String,
        value: String,
        expected: &'static str,
    },

    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("unsupported unit conversion {from} -> {to}")]
    UnsupportedUnits { from: String, to: String },

    #[error("scenario has no magnetic stage")]
    NoMagneticStage,

    #[error("magnetic stage overlaps optical fields at tau = {tau} (|{field}| = {value:e})")]
    MagneticOverlap {
        tau: f64,
        field: &'static str,
        value: f64,
    },

    #[error("integration diverged at tau = {tau} (dt = {dt})")]
    Divergence { tau: f64, dt: f64 },

    #[error("stored coherences violate the dark-state alignment (residual {residual:e})")]
    StorageCondition { residual: f64 },

    #[error("no window where both controls exceed {threshold}")]
    NoQualifyingWindow { threshold: f64 },

    #[error("need at least {needed} snapshots in the window, found {found}")]
    InsufficientSnapshots { needed: usize, found: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
