use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested function.
    #[error("{op}: domain error: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A nested-sum specification has a prefix product too close to the unit circle.
    #[error("inadmissible multiple polylogarithm: |w_{index}| = {modulus} exceeds {limit}")]
    Inadmissible {
        index: usize,
        modulus: f64,
        limit: f64,
    },

    /// The stored constant table does not reach far enough in argument.
    #[error("table exhausted: need N >= {needed}, table has N = {available}")]
    TableExhausted { needed: usize, available: usize },

    /// The stored constant table does not hold enough weights for a full evaluation.
    #[error(
        "weight truncated at u = {u}: table holds K = {k_max}, omitted head term bounded by {bound:e}"
    )]
    WeightTruncated { u: f64, k_max: usize, bound: f64 },

    /// An iteration failed to converge.
    #[error("{op}: no convergence after {iterations} iterations")]
    NoConvergence { op: &'static str, iterations: usize },

    /// Invalid configuration of a sieve or run.
    #[error("configuration error: {0}")]
    Config(String),

    /// The factor finder gave up on a rough survivor.
    #[error("factor search exhausted its retry budget on n = {n}")]
    FactorBudget { n: u128 },

    /// Malformed persisted data.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
