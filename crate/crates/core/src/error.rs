use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("missing cost for flight {flight} on fleet {fleet}")]
    MissingCost { flight: u64, fleet: String },

    #[error("unknown fleet `{0}`")]
    UnknownFleet(String),

    #[error("duplicate flight {flight} on day {day}")]
    DuplicateFlight { flight: u64, day: u32 },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("instance spans {0} days; the balance model is single-day, use the multi-day binary model instead")]
    MultiDay(usize),

    #[error("search space of {bits:.1} bits exceeds the brute-force limit of {limit} bits")]
    TooLarge { bits: f64, limit: f64 },

    #[error("integer variable `{0}` is unbounded")]
    Unbounded(String),

    #[error("coefficient overflow while expanding {0}")]
    Overflow(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
