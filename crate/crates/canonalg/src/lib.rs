//! Canonicalization of finite-dimensional algebras given by structural
//! constants.
//!
//! An algebra structure on `F^m` is a tensor `A^i_{j,k}` (the structural
//! constants), stored as an `m x m^2` matrix. A basis change `g` acts by
//! `A -> g . A . (g^{-1} ⊗ g^{-1})`; two tensors in one orbit describe the
//! same algebra in different bases. This crate builds, for a given dimension
//! and symmetry class, a frozen *profile* of tensor contractions from which a
//! moving frame `P(A)` and a canonical form `C(A) = act(P(A), A)` are
//! computed exactly (big rationals or odd prime fields). Generic algebras are
//! isomorphic iff their canonical forms coincide, and the witnessing basis
//! change is recovered explicitly. Jacobian ranks of the canonical map,
//! computed with dual numbers over a large prime field, measure the
//! transcendence degree of the invariant field empirically.

pub mod canonical;
pub mod contraction;
pub mod dual;
pub mod error;
pub mod invariants;
pub mod matrix;
pub mod scalar;
pub mod structure;

pub use canonical::{
    build_profile, canonical_form, is_generic, iso_test, orbit_decompose, p_matrix, q_matrix,
    CanonProfile, CanonicalCertificate, FrameSource, GenericityReport, IsoVerdict, KAttempt,
};
pub use contraction::{
    distinct_rows, enumerate_schemes, evaluate_scheme, ContractionScheme, SchemeRow,
};
pub use dual::DualScalar;
pub use error::{CanonError, Result};
pub use invariants::{
    expected_trdeg, invariant_values, jacobian_rank, orbit_tangent_rank, JacobianMap, RankReport,
};
pub use matrix::Matrix;
pub use scalar::{Scalar, ScalarKind};
pub use structure::{
    act, multiply_vectors, random_basis_change, random_tensor, trace, validate_symmetry,
    BasisChange, StructureTensor, SymmetryClass, SymmetryReport,
};

/// Prime used for day-to-day modular work: 2^31 - 1.
pub const DEFAULT_PRIME: u64 = (1 << 31) - 1;
/// Prime used for profile probes and rank measurements: 2^61 - 1.
pub const PROBE_PRIME: u64 = (1 << 61) - 1;
