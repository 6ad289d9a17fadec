//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate.
///
/// Validation variants carry the offending magnitude so callers can tell
/// which invariant failed and by how much.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Matrix operation that requires a square matrix got a rectangular one.
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    /// Hermiticity check failed.
    #[error("matrix is not Hermitian: max |M - M^dag| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    /// The Jacobi iteration hit its sweep cap before the off-diagonal mass
    /// fell under the convergence threshold.
    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})"
    )]
    NoConvergence { sweeps: usize, off_norm: f64 },

    /// An eigenvalue fell below the tolerated window around zero.
    #[error(
        "matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} below -{tolerance:.3e}"
    )]
    NotPositive { eigenvalue: f64, tolerance: f64 },

    /// Density matrix trace is off.
    #[error("trace is {trace:.12} but must be 1 (tolerance {tolerance:.3e})")]
    TraceNotOne { trace: f64, tolerance: f64 },

    /// An eigenvalue list fed in as probabilities contains a negative entry.
    #[error("probability vector entry {value:.3e} is negative")]
    NegativeProbability { value: f64 },

    /// An eigenvalue list fed in as probabilities does not sum to one.
    #[error("probability vector sums to {sum:.12}, expected 1 (tolerance {tolerance:.3e})")]
    ProbabilitiesNotNormalized { sum: f64, tolerance: f64 },

    /// A state vector is not normalized.
    #[error("vector norm is {norm:.12}, expected 1 (tolerance {tolerance:.3e})")]
    VectorNotNormalized { norm: f64, tolerance: f64 },

    /// A scalar parameter lies outside its documented range.
    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Two operands disagree on dimension.
    #[error("dimension {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The operation needs a larger Hilbert space than the one given.
    #[error("dimension {dim} is below the minimum {min} for this operation")]
    DimensionTooSmall { dim: usize, min: usize },

    /// Ky Fan rank outside 1..=dim.
    #[error("K = {k} outside 1..={max}")]
    RankOutOfRange { k: usize, max: usize },

    /// Brute-force verifier asked to enumerate more than its cap.
    #[error("problem size {size} exceeds the cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },

    /// Unitarity check failed.
    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    /// No two-level concentration unitary exists for this state.
    #[error("no concentration unitary exists: delta_p = {delta_p:.3e} is not above tolerance {tolerance:.3e}")]
    NoConstruction { delta_p: f64, tolerance: f64 },

    /// State file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}
