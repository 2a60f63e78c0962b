//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An operand's dimension does not match the structure it is paired with.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Dimension required by the receiving structure.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },

    /// A vector failed the mass-function invariants (entries in [0,1], sum 1).
    #[error("invalid mass function: {0}")]
    InvalidMassFunction(String),

    /// A scalar argument is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An enumeration over {0,1}-valued gambles was refused because the state
    /// space is too large.
    #[error("state space too large for exact enumeration: {states} states (limit {limit})")]
    StateSpaceTooLarge {
        /// Number of states requested.
        states: usize,
        /// Enumeration limit.
        limit: usize,
    },

    /// A joint-gamble table or tree would exceed the configured size limit.
    #[error("table too large: {size} entries (limit {limit})")]
    TableTooLarge {
        /// Requested number of entries.
        size: usize,
        /// Configured limit.
        limit: usize,
    },

    /// An operation that requires a PF-like operator was called on one whose
    /// PF-like character could not be established.
    #[error("operator is not PF-like (or could not be certified as such)")]
    NotPfLike,

    /// Fixed-point iteration did not reach the requested tolerance.
    #[error("no convergence after {iters} iterations (residual width {width})")]
    NoConvergence {
        /// Iterations performed.
        iters: usize,
        /// Variation width of the last iterate.
        width: f64,
    },

    /// A situation key does not belong to the tree.
    #[error("unknown situation: {0:?}")]
    UnknownSituation(Vec<usize>),

    /// A real process was rejected by martingale verification.
    #[error("process failed {kind} verification at {violations} situation(s)")]
    MartingaleViolation {
        /// "submartingale" or "supermartingale".
        kind: &'static str,
        /// Number of offending situations.
        violations: usize,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
