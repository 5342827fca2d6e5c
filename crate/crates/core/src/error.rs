//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building, scoring, or certifying a
/// strategy. Structural problems (bad matrices, bad files) and certification
/// failures are kept apart: the latter are reported, not raised.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entries must form a {expected}x{expected} square, got {got} entries")]
    NotSquare { expected: usize, got: usize },

    #[error("matrix entries must be finite (found NaN or infinity)")]
    NonFinite,

    #[error("hermiticity residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualExceeded { residual: f64, tol: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigendecomposition did not converge (dimension {dim})")]
    EigenFailure { dim: usize },

    #[error("n = {n} is not supported: {reason}")]
    UnsupportedN { n: u32, reason: String },

    #[error("observable is not dichotomic: {detail}")]
    NonDichotomic { detail: String },

    #[error("observables {first} and {second} do not anticommute (residual {residual:.3e})")]
    NotAnticommuting {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("state {delta} is invalid: {detail}")]
    StateInvalid { delta: u64, detail: String },

    #[error(
        "spectrum of the first observable is unbalanced: {plus} eigenvalues at +1, {minus} at -1"
    )]
    UnbalancedSpectrum { plus: usize, minus: usize },

    #[error("diagonal blocks do not vanish (residual {residual:.3e}); anticommutation with the diagonalized observable is violated")]
    DiagonalLeakage { residual: f64 },

    #[error("off-diagonal block is not unitary (residual {residual:.3e})")]
    NonUnitaryBlock { residual: f64 },

    #[error("reduced observable {index} lost hermiticity (residual {residual:.3e})")]
    HermiticityLost { index: usize, residual: f64 },

    #[error(
        "reduced observables {first} and {second} lost anticommutation (residual {residual:.3e})"
    )]
    AnticommutationLost {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("dimension {dim} is not divisible by {factor}")]
    DimensionNotDivisible { dim: usize, factor: usize },

    #[error("exact arithmetic overflow: {0}")]
    NumericOverflow(String),

    #[error("solver iteration limit reached after {0} pivots")]
    IterationLimit(u64),

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        // serde_json already reports line/column in its Display output.
        Error::Parse(e.to_string())
    }
}
