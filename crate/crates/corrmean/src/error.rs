//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by encoders, decoders, analytics, the oracle, data
/// loading, and task simulations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("budget k={k} out of range for dimension d={d}")]
    Budget { k: usize, d: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("vector entries must be finite")]
    NonFinite,

    #[error("sparse message indices must be strictly increasing and below the dimension")]
    BadIndices,

    #[error("node count mismatch: expected {expected}, found {found}")]
    NodeCount { expected: usize, found: usize },

    #[error("server memory is in {found} mode, operation requires {required}")]
    MemoryMode {
        required: &'static str,
        found: &'static str,
    },

    #[error("T(m) must be positive and finite for every m in 1..=n")]
    InvalidTFunction,

    #[error("rho={rho} outside the feasible range [-1, {max}]")]
    RhoRange { rho: f64, max: f64 },

    #[error(
        "enumeration would visit about {patterns:.3e} patterns (limit {limit:.3e}); \
         use monte_carlo instead"
    )]
    EnumerationTooLarge { patterns: f64, limit: f64 },

    #[error("weights must be non-negative, finite, and not sum to zero")]
    BadWeights,

    #[error("incompatible encoder/decoder pairing: {0}")]
    Incompatible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("idx format error in {path}: {detail}")]
    IdxFormat { path: String, detail: String },

    #[error(
        "training diverged at round {round}: loss {loss:.3e} exceeds 1e3 x initial loss {initial:.3e}"
    )]
    Diverged {
        round: usize,
        loss: f64,
        initial: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
