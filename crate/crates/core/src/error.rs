//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid type vector: {0}")]
    InvalidType(String),

    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("rank 0 has no string in the shortest-first enumeration")]
    ZeroRank,

    #[error("code does not cover type {0}")]
    MissingType(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("threshold comparison too close to resolve in floating point: {0}")]
    AmbiguousThreshold(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("least-squares fit rejected: {0}")]
    BadFit(String),

    #[error("argument out of domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
