use alloc::string::String;

/// Errors raised by operator, geometry, solver and verification routines.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension must be at least 1")]
    EmptyDimension,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid convex set: {0}")]
    InvalidSet(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("refusing a vacuous check: the pair list is empty")]
    EmptyPairs,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("iterate became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("non-expansive operator: expansiveness modulus {gamma:e} is not positive")]
    NotExpansive { gamma: f64 },

    #[error("brute-force grid has {points} points, above the limit of {limit}")]
    GridOverflow { points: u128, limit: u128 },

    #[error("brute-force grid unsupported: {0}")]
    GridUnsupported(&'static str),
}
