use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {value} is outside the domain of {space}")]
    Domain { space: String, value: f64 },

    #[error("non-finite point value")]
    NonFinite,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sequence `{name}` has no piece matching index {n}")]
    Incomplete { name: String, n: u64 },

    #[error("selection has no members up to horizon {horizon}")]
    DegenerateSelection { horizon: u64 },

    #[error("subsequence `{name}` is materialized only up to term {len}, term {k} requested")]
    BeyondHorizon { name: String, len: u64, k: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
