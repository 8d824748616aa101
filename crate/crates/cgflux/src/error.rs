//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CgError {
    /// A point lies outside the domain where a geometric query is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A length parameter is outside the valid range (e.g. h >= h0).
    #[error("range error: {0}")]
    Range(String),

    /// A scale is not resolvable on the grid (e.g. l < 4*dx).
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Invalid argument combination (mismatched grids, bad exponent, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// The requested operation is not defined for this domain shape.
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    /// Too few usable samples for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed field file or config value.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, CgError>;
