use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// One or more validation failures; every violation found is listed.
    #[error("invalid input: {}", .0.join("; "))]
    Invalid(Vec<String>),

    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceLimit {
        what: String,
        requested: u64,
        cap: u64,
    },

    #[error("word {word} is not admissible: {reason}")]
    Inadmissible { word: String, reason: String },

    #[error("transition matrix is not primitive; restrict to a primitive component first")]
    NotPrimitive,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(
        "certified bracket requested for a weight vector with negative components; \
         use heuristic mode or supply an almost-multiplicativity constant on a full shift"
    )]
    NegativeWeightCertified,

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(vec![msg.into()])
    }
}
