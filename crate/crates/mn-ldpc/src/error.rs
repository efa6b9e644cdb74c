//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by code construction, file I/O, decoding and the
/// experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported field size {0} (expected a power of two in 2..=256)")]
    UnsupportedField(usize),

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("infeasible code parameters: {0}")]
    InfeasibleParameters(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: value {value} out of field GF({q}) (expected 1..={})", q - 1)]
    ValueOutOfField {
        path: String,
        line: usize,
        value: u64,
        q: usize,
    },

    #[error("matrix file {0}: no entries")]
    NoEntries(String),

    #[error("unknown source model `{0}` (expected markov2s, markov4s or iid)")]
    UnknownModel(String),

    #[error("invalid transition matrix: {0}")]
    InvalidModel(String),

    #[error("transition matrix is not irreducible: stationary distribution is not unique")]
    NotIrreducible,

    #[error("invalid channel parameter: {0}")]
    InvalidChannel(String),

    #[error("contradictory messages at variable {variable}: all symbol probabilities vanished")]
    ContradictoryMessages { variable: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
