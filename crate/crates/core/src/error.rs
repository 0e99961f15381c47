use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates an invariant. `key` is the config key
    /// at fault.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("failed to parse configuration: {0}")]
    ConfigParse(String),

    #[error("weighted probability for {tier} tier is {value}, must be below 1")]
    ProbabilityOutOfRange { tier: &'static str, value: f64 },

    #[error("average distance requires at least one node")]
    EmptyNetwork,

    #[error("runs being compared differ in non-seed configuration: {0}")]
    MismatchedConfigs(String),

    #[error("no runs supplied for aggregation")]
    NoRuns,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed CSV at line {line}: {reason}")]
    MalformedCsv {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key,
            reason: reason.into(),
        }
    }
}
