//! Shared fixtures for the criterion benchmarks: deterministic profiles,
//! tensors, and basis changes at the sizes the benches exercise.

use canonalg::{
    build_profile, random_basis_change, random_tensor, BasisChange, CanonProfile, ScalarKind,
    StructureTensor, SymmetryClass, DEFAULT_PRIME,
};

pub fn m2_profile() -> CanonProfile {
    build_profile(2, SymmetryClass::General, 1, None).expect("m2-general builds")
}

pub fn m3_profile() -> CanonProfile {
    build_profile(3, SymmetryClass::General, 1, None).expect("m3-general builds")
}

pub fn tensor(m: usize, kind: ScalarKind, seed: u64) -> StructureTensor {
    random_tensor(m, SymmetryClass::General, kind, seed).expect("draw succeeds")
}

pub fn basis_change(m: usize, kind: ScalarKind, seed: u64) -> BasisChange {
    random_basis_change(m, kind, seed).expect("draw succeeds")
}

pub fn fp_kind() -> ScalarKind {
    ScalarKind::Fp(DEFAULT_PRIME)
}
