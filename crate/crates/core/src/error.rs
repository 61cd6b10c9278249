use thiserror::Error;

/// Every failure surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("expression error at offset {pos}: {msg}")]
    Expr { pos: usize, msg: String },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("moment of order {0} is not finite")]
    OverflowToInfinity(usize),
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("degree overflow: need moments of order {needed}, have {available}")]
    DegreeOverflow { needed: usize, available: usize },
    #[error("ill-conditioned at working precision: {0}")]
    IllConditioned(String),
    #[error("index {index} exceeds available {available}")]
    IndexOverflow { index: usize, available: usize },
    #[error("evaluation point must be non-real")]
    RealPoint,
    #[error("pole: {0}")]
    Pole(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero denominator at index {0}")]
    ZeroDenominator(usize),
    #[error("even moment of order {0} is not positive")]
    NonPositiveEvenMoment(usize),
    #[error("moment matrix is rank deficient; support has {support_points} points")]
    RankDeficient { support_points: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
