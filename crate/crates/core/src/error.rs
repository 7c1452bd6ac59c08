//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A vector had the wrong length.
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// A value that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// An empty batch or sample set was supplied where one is required.
    #[error("empty input: {0}")]
    Empty(&'static str),
    /// A bound formula needs a data moment that the moment table cannot supply.
    #[error("missing moment: E[{kind}] of order {order}")]
    MissingMoment { kind: &'static str, order: f64 },
    /// A bound formula is outside the range covered by the theory.
    #[error("degenerate exponent: {0}")]
    DegenerateExponent(String),
    /// A bound needs a moment of the target measure that was not supplied.
    #[error("missing target-measure moment: {0}")]
    MissingTargetMoment(&'static str),
    /// The law has no analytic CDF.
    #[error("no CDF available for data law {0}")]
    CdfUnavailable(String),
    /// The quadrature grid does not contain the bulk of the density.
    #[error("grid too narrow: boundary density ratio {ratio:e} exceeds {limit:e}")]
    GridTooNarrow { ratio: f64, limit: f64 },
    /// A subtraction in log-domain arithmetic would produce a non-positive value.
    #[error("log-domain subtraction produced a non-positive value")]
    NonPositive,
    /// Malformed data file.
    #[error("data error in {file}: {message}")]
    Data { file: String, message: String },
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;
