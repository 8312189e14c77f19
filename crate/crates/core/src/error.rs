use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: row {row}: {message}")]
    Csv {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("malformed header in {path}: {message}")]
    Header { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("feature `{feature}` has no observed cells in the fitting data")]
    EmptyFeature { feature: String },

    #[error("rate unattainable under {mechanism} with this observed fraction: per-feature rate {per_feature_rate:.4} exceeds 0.99")]
    RateUnattainable {
        mechanism: &'static str,
        per_feature_rate: f64,
    },

    #[error("unknown imputation method `{name}`; registered methods: {}", registered.join(", "))]
    UnknownMethod {
        name: String,
        registered: Vec<String>,
    },

    #[error("imputation method `{0}` is already registered")]
    DuplicateMethod(String),

    #[error("invalid parameter for `{method}`: {message}")]
    InvalidParam { method: String, message: String },

    #[error("{method} did not converge after {iterations} iterations")]
    NonConvergence { method: String, iterations: usize },

    #[error("{method} diverged (non-finite loss) at epoch {epoch}")]
    Divergence { method: String, epoch: usize },

    #[error("evaluation mask is empty")]
    EmptyEvaluation,

    #[error("reports have mixed provenance: {0}")]
    MixedProvenance(String),

    #[error("unknown group key `{0}`")]
    UnknownGroupKey(String),

    #[error("outcome label required")]
    MissingOutcome,

    #[error("both outcome classes must be present")]
    SingleClass,

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that stem from bad user input rather than runtime failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::UnknownMethod { .. }
                | Error::InvalidParam { .. }
                | Error::UnknownGroupKey(_)
        )
    }
}
