use thiserror::Error;

use crate::selection::Strategy;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("angular standard deviation must be non-negative, got {0}")]
    NegativeAngularSpread(f64),

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("LDPC construction failed after {attempts} attempts")]
    CodeConstruction { attempts: usize },

    #[error("parity-check matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("malformed alist data: {0}")]
    Alist(String),

    #[error("strategy {0} requires local LLRs but none were supplied")]
    MissingLlrs(Strategy),

    #[error("user {user} has zero aggregate channel gain")]
    ZeroAggregateGain { user: usize },

    #[error("no access point has room left for user {user}")]
    Unservable { user: usize },

    #[error("trial {index} failed: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
