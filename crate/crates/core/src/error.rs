use thiserror::Error;

/// Errors raised across the library.
///
/// Variants carry enough context to be surfaced verbatim by the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric: max |a_ij - a_ji| = {asymmetry:e} exceeds {tolerance:e}")]
    Asymmetric { asymmetry: f64, tolerance: f64 },

    #[error("inverse iteration did not converge for eigenvalue index {index}")]
    InverseIteration { index: usize },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("iteration limit reached; best bracket [{lo}, {hi}]")]
    MaxIterations { lo: f64, hi: f64 },

    #[error("degenerate bracket [{lo}, {hi}]")]
    DegenerateBracket { lo: f64, hi: f64 },

    #[error("window [{a}, {b}] is not regular: {reason}")]
    IrregularWindow { a: f64, b: f64, reason: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("geometry rejected: {0}")]
    Geometry(String),

    #[error("truncation insufficient: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
