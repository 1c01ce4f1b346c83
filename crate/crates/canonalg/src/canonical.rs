//! Canonicalization profiles and the canonical form:
//! pick `m^k` independent contraction rows (the matrix `Q`), extract a frame
//! `P(A)` with `P(act(g,A)) = P(A)·g⁻¹` from `M(A)·Q(A)⁻¹`, and reduce every
//! generic tensor to the unique orbit representative `C(A) = act(P(A), A)`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contraction::{distinct_rows_fp, evaluate_scheme_entries, ContractionScheme};
use crate::error::{CanonError, Result};
use crate::matrix::{Coeff, Matrix};
use crate::scalar::{Scalar, ScalarKind};
use crate::structure::{
    act, act_entries, random_tensor, trace_entries, BasisChange, StructureTensor, SymmetryClass,
};
use crate::PROBE_PRIME;

/// Which trace row feeds the frame matrix `M(X) = X ⊗ Tr(X)^{⊗(k−2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameSource {
    Tr1,
    Tr2,
}

impl std::fmt::Display for FrameSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FrameSource::Tr1 => "tr1",
            FrameSource::Tr2 => "tr2",
        })
    }
}

/// Record of one attempted tensor power during profile building.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KAttempt {
    pub k: usize,
    /// (2k)!/k! enumerated schemes.
    pub raw_count: usize,
    /// Rows surviving probe-point deduplication.
    pub distinct_count: usize,
    /// m^k rows are required.
    pub needed: usize,
    /// distinct_count ≥ needed.
    pub gate_passed: bool,
    /// Rank of the distinct pool at the probe point (measured only when the
    /// gate passed); a profile needs rank = needed.
    pub rank: Option<usize>,
    /// Whether a nonsingular frame minor was found and confirmed at the
    /// second probe (attempted only at full rank).
    pub frame_found: Option<bool>,
}

/// A frozen canonicalization recipe. Two canonical forms are comparable only
/// when they were produced under profiles with identical `profile_hash`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonProfile {
    pub format_version: u32,
    pub m: usize,
    pub sym: SymmetryClass,
    pub k: usize,
    /// Exactly m^k schemes, in enumeration order of their first occurrence.
    pub q_schemes: Vec<ContractionScheme>,
    pub frame_source: FrameSource,
    /// 0-based columns of M·Q⁻¹ forming P⁻¹; empty for k = 1 (there P := Q).
    pub frame_columns: Vec<usize>,
    pub build_seed: u64,
    /// Primes of the two probe points used to certify the build.
    pub probe_primes: [u64; 2],
    /// SHA-256 (hex) of the canonical serialization of all other fields.
    pub profile_hash: String,
}

impl CanonProfile {
    /// Canonical bytes of everything except the hash field: JSON with sorted
    /// keys and no insignificant whitespace.
    pub fn canonical_bytes_without_hash(&self) -> Vec<u8> {
        let mut value = serde_json::to_value(self).expect("profile serialization cannot fail");
        value
            .as_object_mut()
            .expect("profile serializes to an object")
            .remove("profile_hash");
        serde_json::to_vec(&value).expect("value serialization cannot fail")
    }

    pub fn compute_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_bytes_without_hash());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Check the stored hash against the canonical serialization.
    pub fn verify_hash(&self) -> Result<()> {
        let actual = self.compute_hash();
        if actual != self.profile_hash {
            return Err(CanonError::ProfileMismatch(format!(
                "stored profile_hash {} does not match canonical serialization hash {}",
                self.profile_hash, actual
            )));
        }
        Ok(())
    }

    /// Canonical file bytes (hash field included, sorted keys, compact).
    pub fn to_canonical_json(&self) -> Vec<u8> {
        let value = serde_json::to_value(self).expect("profile serialization cannot fail");
        serde_json::to_vec(&value).expect("value serialization cannot fail")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let profile: CanonProfile =
            serde_json::from_slice(bytes).map_err(|e| CanonError::ParseError {
                location: "profile".into(),
                message: e.to_string(),
            })?;
        profile.verify_hash()?;
        profile.validate_shape()?;
        Ok(profile)
    }

    fn validate_shape(&self) -> Result<()> {
        let needed = self.m.checked_pow(self.k as u32).ok_or_else(|| {
            CanonError::ProfileMismatch("m^k overflows".into())
        })?;
        if self.q_schemes.len() != needed {
            return Err(CanonError::ProfileMismatch(format!(
                "profile lists {} schemes, needs m^k = {}",
                self.q_schemes.len(),
                needed
            )));
        }
        for s in &self.q_schemes {
            if s.k() != self.k {
                return Err(CanonError::ProfileMismatch(
                    "scheme power differs from profile k".into(),
                ));
            }
        }
        if self.k >= 2 {
            if self.frame_columns.len() != self.m {
                return Err(CanonError::ProfileMismatch(format!(
                    "profile lists {} frame columns, needs m = {}",
                    self.frame_columns.len(),
                    self.m
                )));
            }
            if self.frame_columns.iter().any(|&c| c >= needed) {
                return Err(CanonError::ProfileMismatch(
                    "frame column index out of range".into(),
                ));
            }
        }
        Ok(())
    }

    fn check_input(&self, a: &StructureTensor) -> Result<()> {
        if a.m() != self.m {
            return Err(CanonError::ProfileMismatch(format!(
                "profile is for m = {}, tensor has m = {}",
                self.m,
                a.m()
            )));
        }
        if a.sym() != self.sym {
            return Err(CanonError::ProfileMismatch(format!(
                "profile is for symmetry class {}, tensor is {}",
                self.sym,
                a.sym()
            )));
        }
        Ok(())
    }
}

/// The three genericity diagnostics; the construction applies iff all hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenericityReport {
    pub det_q_nonzero: bool,
    pub frame_minor_nonzero: bool,
    pub rank_m: bool,
}

impl GenericityReport {
    pub fn generic(&self) -> bool {
        self.det_q_nonzero && self.frame_minor_nonzero && self.rank_m
    }
}

/// Output of [`canonical_form`]: the orbit representative, the frame that
/// produced it, and the profile it is comparable under.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalCertificate {
    pub canonical: StructureTensor,
    pub frame: Matrix<Scalar>,
    pub profile_hash: String,
    pub generic: GenericityReport,
}

/// Verdict of [`iso_test`]; the witness satisfies `B = act(witness, A)` and
/// is verified before being returned.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoVerdict {
    pub equivalent: bool,
    pub witness: Option<BasisChange>,
}

// ---------------------------------------------------------------------------
// Generic pipeline pieces (shared by exact scalars and dual numbers).
// ---------------------------------------------------------------------------

/// Stack the profile's scheme rows into the m^k × m^k matrix Q(A).
pub(crate) fn q_matrix_entries<T: Coeff>(
    profile: &CanonProfile,
    entries: &Matrix<T>,
) -> Result<Matrix<T>> {
    let m = profile.m;
    let n = profile.q_schemes.len();
    let mut data = Vec::with_capacity(n * n);
    for scheme in &profile.q_schemes {
        data.extend(evaluate_scheme_entries(scheme, entries, m));
    }
    Matrix::new(n, n, data)
}

/// M(X) = X ⊗ Tr(X)^{⊗(k−2)} (m × m^k); for k = 2 this is X itself.
pub(crate) fn m_matrix_entries<T: Coeff>(
    profile: &CanonProfile,
    entries: &Matrix<T>,
) -> Result<Matrix<T>> {
    let m = profile.m;
    let slot = match profile.frame_source {
        FrameSource::Tr1 => 1,
        FrameSource::Tr2 => 2,
    };
    let mut out = entries.clone();
    if profile.k >= 3 {
        let tr = trace_entries(entries, m, slot)?;
        if tr.data().iter().all(|v| v.is_zero()) {
            // the frame matrix degenerates to zero
            return Err(CanonError::NonGenericInput(GenericityReport {
                det_q_nonzero: true,
                frame_minor_nonzero: false,
                rank_m: true,
            }));
        }
        for _ in 0..profile.k - 2 {
            out = out.kron(&tr)?;
        }
    }
    Ok(out)
}

/// Compute (P, P⁻¹) for arbitrary coefficients. Fails with SingularMatrix /
/// NonInvertibleDual when the input is degenerate at this profile.
pub(crate) fn frame_pair_entries<T: Coeff>(
    profile: &CanonProfile,
    entries: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>)> {
    let q = q_matrix_entries(profile, entries)?;
    if profile.k == 1 {
        let pinv = q.inverse_generic()?;
        return Ok((q, pinv));
    }
    let qinv = q.inverse_generic()?;
    let mm = m_matrix_entries(profile, entries)?;
    let r = mm.mul(&qinv)?;
    let pinv = r.select_columns(&profile.frame_columns)?;
    let p = pinv.inverse_generic()?;
    Ok((p, pinv))
}

/// C(A) entries for arbitrary coefficients: act(P, A).
pub(crate) fn canonical_entries<T: Coeff>(
    profile: &CanonProfile,
    entries: &Matrix<T>,
) -> Result<Matrix<T>> {
    let (p, pinv) = frame_pair_entries(profile, entries)?;
    act_entries(&p, &pinv, entries)
}

// ---------------------------------------------------------------------------
// Public operations on exact scalars.
// ---------------------------------------------------------------------------

/// Q(A) under the profile's frozen scheme list.
pub fn q_matrix(profile: &CanonProfile, a: &StructureTensor) -> Result<Matrix<Scalar>> {
    profile.check_input(a)?;
    q_matrix_entries(profile, a.entries())
}

/// Genericity diagnostics: det Q(A) ≠ 0, frame minor ≠ 0, rank(A) = m.
pub fn is_generic(profile: &CanonProfile, a: &StructureTensor) -> Result<GenericityReport> {
    profile.check_input(a)?;
    let m = profile.m;
    let rank_m = a.entries().rank() == m;
    let q = q_matrix_entries(profile, a.entries())?;
    let det_q_nonzero = !q.det_exact()?.is_zero();
    let mut frame_minor_nonzero = false;
    if det_q_nonzero {
        if profile.k == 1 {
            frame_minor_nonzero = true; // the frame is Q itself
        } else {
            let qinv = q.inverse()?;
            match m_matrix_entries(profile, a.entries()) {
                Ok(mm) => {
                    let r = mm.mul(&qinv)?;
                    let minor = r.select_columns(&profile.frame_columns)?;
                    frame_minor_nonzero = !minor.det_exact()?.is_zero();
                }
                Err(CanonError::NonGenericInput(_)) => frame_minor_nonzero = false,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(GenericityReport {
        det_q_nonzero,
        frame_minor_nonzero,
        rank_m,
    })
}

fn require_generic(profile: &CanonProfile, a: &StructureTensor) -> Result<GenericityReport> {
    let report = is_generic(profile, a)?;
    if !report.generic() {
        return Err(CanonError::NonGenericInput(report));
    }
    Ok(report)
}

/// The frame P(A), an m × m matrix with P(act(g,A)) = P(A)·g⁻¹.
pub fn p_matrix(profile: &CanonProfile, a: &StructureTensor) -> Result<Matrix<Scalar>> {
    require_generic(profile, a)?;
    let (p, _) = frame_pair_entries(profile, a.entries())?;
    Ok(p)
}

/// Canonical form C(A) = act(P(A), A) with certificate.
pub fn canonical_form(profile: &CanonProfile, a: &StructureTensor) -> Result<CanonicalCertificate> {
    let report = require_generic(profile, a)?;
    let (p, pinv) = frame_pair_entries(profile, a.entries())?;
    let c_entries = act_entries(&p, &pinv, a.entries())?;
    let canonical = StructureTensor::new(a.m(), a.sym(), c_entries)?;
    Ok(CanonicalCertificate {
        canonical,
        frame: p,
        profile_hash: profile.profile_hash.clone(),
        generic: report,
    })
}

/// Decide isomorphism: C(A) = C(B) entrywise; a verified witness
/// `g = P(B)⁻¹·P(A)` (so that B = act(g, A)) accompanies every "equivalent".
pub fn iso_test(
    profile: &CanonProfile,
    a: &StructureTensor,
    b: &StructureTensor,
) -> Result<IsoVerdict> {
    let ca = canonical_form(profile, a)?;
    let cb = canonical_form(profile, b)?;
    if ca.canonical != cb.canonical {
        return Ok(IsoVerdict {
            equivalent: false,
            witness: None,
        });
    }
    let g = cb.frame.inverse()?.mul(&ca.frame)?;
    let witness = BasisChange::new(g)?;
    let check = act(&witness, a)?;
    if &check != b {
        return Err(CanonError::WitnessVerificationFailure(
            "canonical forms agree but P(B)⁻¹P(A) does not map A to B".into(),
        ));
    }
    Ok(IsoVerdict {
        equivalent: true,
        witness: Some(witness),
    })
}

/// Split A into (g₀, C) with A = act(g₀, C): the frame coordinates and the
/// orbit representative. Round-trips exactly.
pub fn orbit_decompose(
    profile: &CanonProfile,
    a: &StructureTensor,
) -> Result<(BasisChange, StructureTensor)> {
    let cert = canonical_form(profile, a)?;
    let g0 = BasisChange::new(cert.frame.inverse()?)?;
    let back = act(&g0, &cert.canonical)?;
    if &back != a {
        return Err(CanonError::WitnessVerificationFailure(
            "act(P(A)⁻¹, C(A)) failed to reproduce A".into(),
        ));
    }
    Ok((g0, cert.canonical))
}

// ---------------------------------------------------------------------------
// Profile building.
// ---------------------------------------------------------------------------

use crate::matrix::FpRowBasis as RowBasis;

fn fp_scalar_matrix(rows: usize, cols: usize, data: &[Vec<u64>]) -> Result<Matrix<Scalar>> {
    let mut out = Vec::with_capacity(rows * cols);
    for r in data {
        out.extend(r.iter().map(|&v| Scalar::fp_unchecked(PROBE_PRIME, v)));
    }
    Matrix::new(rows, cols, out)
}

/// Greedy leftmost selection of m columns of R whose minor is nonsingular.
fn greedy_frame_columns(r: &Matrix<Scalar>, m: usize) -> Option<Vec<usize>> {
    let mut cols: Vec<usize> = Vec::new();
    for c in 0..r.cols() {
        let mut candidate = cols.clone();
        candidate.push(c);
        let sub = r.select_columns(&candidate).ok()?;
        if sub.rank() == candidate.len() {
            cols = candidate;
            if cols.len() == m {
                return Some(cols);
            }
        }
    }
    None
}

/// Search k = 1, 2, … for a frozen canonicalization recipe: enough distinct
/// contraction rows (≥ m^k), full rank among them, and a nonsingular frame
/// minor, all certified at two seeded probe points over F_{2^61−1}. Returns
/// AssumptionViolation with the per-k evidence when no k ≤ k_max works —
/// that outcome is meaningful, not an internal failure.
pub fn build_profile(
    m: usize,
    sym: SymmetryClass,
    seed: u64,
    k_max: Option<usize>,
) -> Result<CanonProfile> {
    if m < 2 {
        return Err(CanonError::DimensionMismatch(format!(
            "dimension must be at least 2, got {m}"
        )));
    }
    let k_max = k_max.unwrap_or(m + 3);
    if k_max < 1 {
        return Err(CanonError::DimensionMismatch(
            "k_max must be at least 1".into(),
        ));
    }
    let p = PROBE_PRIME;
    let probe1 = random_tensor(m, sym, ScalarKind::Fp(p), seed)?;
    let probe2 = random_tensor(m, sym, ScalarKind::Fp(p), seed + 1)?;

    let mut attempts: Vec<KAttempt> = Vec::new();
    for k in 1..=k_max {
        let needed = m.pow(k as u32);
        let pool = distinct_rows_fp(k, m, sym, seed, false)?;
        let mut attempt = KAttempt {
            k,
            raw_count: pool.raw_count,
            distinct_count: pool.items.len(),
            needed,
            gate_passed: pool.items.len() >= needed,
            rank: None,
            frame_found: None,
        };
        if !attempt.gate_passed {
            attempts.push(attempt);
            continue;
        }

        // Greedy rank scan at probe 1 in first-occurrence order.
        let mut basis = RowBasis::new(p);
        let mut selected: Vec<usize> = Vec::new();
        for (i, item) in pool.items.iter().enumerate() {
            if basis.try_add(&item.row1) {
                selected.push(i);
                if selected.len() == needed {
                    break;
                }
            }
        }
        if selected.len() < needed {
            attempt.rank = Some(basis.rank());
            attempts.push(attempt);
            continue;
        }
        attempt.rank = Some(needed);

        // Confirm Q at the second probe point.
        let mut basis2 = RowBasis::new(p);
        let q2_full = selected
            .iter()
            .all(|&i| basis2.try_add(&pool.items[i].row2));
        if !q2_full {
            attempt.frame_found = Some(false);
            attempts.push(attempt);
            continue;
        }

        if k == 1 {
            attempt.frame_found = Some(true);
            attempts.push(attempt);
            let mut profile = CanonProfile {
                format_version: 1,
                m,
                sym,
                k,
                q_schemes: selected
                    .iter()
                    .map(|&i| pool.items[i].scheme.clone())
                    .collect(),
                frame_source: FrameSource::Tr1,
                frame_columns: Vec::new(),
                build_seed: seed,
                probe_primes: [p, p],
                profile_hash: String::new(),
            };
            profile.profile_hash = profile.compute_hash();
            return Ok(profile);
        }

        // Frame selection: M·Q⁻¹ at probe 1, greedy leftmost minor, confirmed
        // at probe 2; Tr₂ is the fallback when Tr₁ fails.
        let q1 = fp_scalar_matrix(
            needed,
            needed,
            &selected
                .iter()
                .map(|&i| pool.items[i].row1.clone())
                .collect::<Vec<_>>(),
        )?;
        let q2 = fp_scalar_matrix(
            needed,
            needed,
            &selected
                .iter()
                .map(|&i| pool.items[i].row2.clone())
                .collect::<Vec<_>>(),
        )?;
        let q1inv = q1.inverse()?;
        let q2inv = q2.inverse()?;

        let mut found: Option<(FrameSource, Vec<usize>)> = None;
        for source in [FrameSource::Tr1, FrameSource::Tr2] {
            let trial = CanonProfile {
                format_version: 1,
                m,
                sym,
                k,
                q_schemes: selected
                    .iter()
                    .map(|&i| pool.items[i].scheme.clone())
                    .collect(),
                frame_source: source,
                frame_columns: Vec::new(),
                build_seed: seed,
                probe_primes: [p, p],
                profile_hash: String::new(),
            };
            let m1 = match m_matrix_entries(&trial, probe1.entries()) {
                Ok(mm) => mm,
                Err(CanonError::NonGenericInput(_)) => continue,
                Err(e) => return Err(e),
            };
            let r1 = m1.mul(&q1inv)?;
            let Some(cols) = greedy_frame_columns(&r1, m) else {
                continue;
            };
            // confirm the same minor at probe 2
            let m2 = match m_matrix_entries(&trial, probe2.entries()) {
                Ok(mm) => mm,
                Err(CanonError::NonGenericInput(_)) => continue,
                Err(e) => return Err(e),
            };
            let r2 = m2.mul(&q2inv)?;
            let minor2 = r2.select_columns(&cols)?;
            if minor2.det_exact()?.is_zero() {
                continue;
            }
            found = Some((source, cols));
            break;
        }

        match found {
            Some((source, cols)) => {
                attempt.frame_found = Some(true);
                attempts.push(attempt);
                let mut profile = CanonProfile {
                    format_version: 1,
                    m,
                    sym,
                    k,
                    q_schemes: selected
                        .iter()
                        .map(|&i| pool.items[i].scheme.clone())
                        .collect(),
                    frame_source: source,
                    frame_columns: cols,
                    build_seed: seed,
                    probe_primes: [p, p],
                    profile_hash: String::new(),
                };
                profile.profile_hash = profile.compute_hash();
                return Ok(profile);
            }
            None => {
                attempt.frame_found = Some(false);
                attempts.push(attempt);
            }
        }
    }

    let max_rank = attempts.iter().filter_map(|a| a.rank).max().unwrap_or(0);
    Err(CanonError::AssumptionViolation {
        m,
        sym: sym.to_string(),
        k_max,
        max_rank,
        attempts,
    })
}
