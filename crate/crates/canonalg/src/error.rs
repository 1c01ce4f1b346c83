//! Error taxonomy shared by the whole crate.

use thiserror::Error;

use crate::canonical::{GenericityReport, KAttempt};

pub type Result<T> = std::result::Result<T, CanonError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CanonError {
    #[error("division by zero")]
    DivisionByZero,

    #[error("scalar kind mismatch: {0}")]
    KindMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix")]
    SingularMatrix,

    #[error("dual number with zero value part is not invertible")]
    NonInvertibleDual,

    #[error("symmetry violation at (i={i}, j={j}, k={k}) for declared class {class}")]
    SymmetryViolation {
        /// 1-based upper index of the first offending entry.
        i: usize,
        /// 1-based first lower index.
        j: usize,
        /// 1-based second lower index.
        k: usize,
        class: String,
    },

    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    #[error("parse error at {location}: {message}")]
    ParseError { location: String, message: String },

    #[error("input tensor is not generic under this profile: {0:?}")]
    NonGenericInput(GenericityReport),

    #[error("no generic probe tensor found after {attempts} attempts (seed {seed})")]
    NonGenericProbe { seed: u64, attempts: u32 },

    #[error(
        "no contraction profile exists for m={m}, {sym} up to k={k_max}; \
         maximal generic rank achieved: {max_rank} (attempts: {attempts:?})"
    )]
    AssumptionViolation {
        m: usize,
        sym: String,
        k_max: usize,
        /// Best rank reached by any attempted k (target is m^k at each k).
        max_rank: usize,
        attempts: Vec<KAttempt>,
    },

    #[error("witness verification failed (internal invariant breach): {0}")]
    WitnessVerificationFailure(String),

    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),
}
