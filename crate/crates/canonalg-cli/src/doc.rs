//! File formats: tensor documents, result documents, and the canonical JSON
//! writer. Canonical serialization means sorted keys, no insignificant
//! whitespace, rationals in lowest terms — byte-stable across runs.

use std::str::FromStr;

use canonalg::{
    CanonError, CanonicalCertificate, GenericityReport, KAttempt, Matrix, RankReport, Result,
    Scalar, ScalarKind, StructureTensor, SymmetryClass,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// A structure tensor on disk: `m` rows of `m²` entry strings, column order
/// `(j−1)·m + k`. Rationals are written `"n"` or `"p/q"` in lowest terms;
/// prime-field entries are decimal residues in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDocument {
    pub format_version: u32,
    pub m: usize,
    pub symmetry: String,
    /// `"rational"` or `"fp:<p>"` with p an odd prime.
    pub field: String,
    pub entries: Vec<Vec<String>>,
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> CanonError {
    CanonError::ParseError {
        location: location.into(),
        message: message.into(),
    }
}

/// Parse `"rational"` or `"fp:<p>"`; the prime is validated (odd, prime).
pub fn parse_field(s: &str) -> Result<ScalarKind> {
    if s == "rational" {
        return Ok(ScalarKind::Rational);
    }
    if let Some(p_str) = s.strip_prefix("fp:") {
        let p: u64 = p_str
            .parse()
            .map_err(|e| parse_err("field", format!("bad prime in {s:?}: {e}")))?;
        Scalar::fp(p, 0)?; // validates p > 2 and primality
        return Ok(ScalarKind::Fp(p));
    }
    Err(parse_err(
        "field",
        format!("expected \"rational\" or \"fp:<p>\", got {s:?}"),
    ))
}

fn parse_entry(kind: ScalarKind, s: &str, location: &str) -> Result<Scalar> {
    match kind {
        ScalarKind::Rational => {
            let (num_str, den_str) = match s.split_once('/') {
                Some((a, b)) => (a, b),
                None => (s, "1"),
            };
            let num = BigInt::from_str(num_str)
                .map_err(|e| parse_err(location, format!("bad numerator {num_str:?}: {e}")))?;
            let den = BigInt::from_str(den_str)
                .map_err(|e| parse_err(location, format!("bad denominator {den_str:?}: {e}")))?;
            if den.is_zero() {
                return Err(parse_err(location, "zero denominator"));
            }
            Ok(Scalar::from_big_rational(BigRational::new(num, den)))
        }
        ScalarKind::Fp(p) => {
            let v: u64 = s
                .parse()
                .map_err(|e| parse_err(location, format!("bad residue {s:?}: {e}")))?;
            Scalar::fp(p, v)
        }
    }
}

/// Validate and convert a document into a structure tensor. The symmetry
/// class is checked entry by entry, so a violating document is rejected.
pub fn parse_tensor(doc: &TensorDocument) -> Result<StructureTensor> {
    if doc.format_version != FORMAT_VERSION {
        return Err(parse_err(
            "format_version",
            format!("unsupported version {}", doc.format_version),
        ));
    }
    let sym = SymmetryClass::parse(&doc.symmetry)?;
    let kind = parse_field(&doc.field)?;
    let m = doc.m;
    if doc.entries.len() != m {
        return Err(parse_err(
            "entries",
            format!("expected {m} rows, got {}", doc.entries.len()),
        ));
    }
    let mut data = Vec::with_capacity(m * m * m);
    for (r, row) in doc.entries.iter().enumerate() {
        if row.len() != m * m {
            return Err(parse_err(
                format!("entries[{r}]"),
                format!("expected {} columns, got {}", m * m, row.len()),
            ));
        }
        for (c, s) in row.iter().enumerate() {
            data.push(parse_entry(kind, s, &format!("entries[{r}][{c}]"))?);
        }
    }
    StructureTensor::new(m, sym, Matrix::new(m, m * m, data)?)
}

/// Matrix entries as display strings, row by row.
pub fn matrix_strings(mat: &Matrix<Scalar>) -> Vec<Vec<String>> {
    (0..mat.rows())
        .map(|r| mat.row_slice(r).iter().map(|s| s.to_string()).collect())
        .collect()
}

/// Render a tensor as a document; `parse_tensor` inverts this exactly.
pub fn tensor_to_document(a: &StructureTensor) -> TensorDocument {
    TensorDocument {
        format_version: FORMAT_VERSION,
        m: a.m(),
        symmetry: a.sym().to_string(),
        field: a.kind().to_string(),
        entries: matrix_strings(a.entries()),
    }
}

/// Canonical JSON bytes: route through `serde_json::Value` so object keys
/// are sorted, then write compactly.
pub fn canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("document serialization cannot fail");
    serde_json::to_vec(&v).expect("document serialization cannot fail")
}

/// A canonicalization certificate in document form.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateDoc {
    pub canonical: TensorDocument,
    pub frame: Vec<Vec<String>>,
    pub generic: GenericityReport,
    pub profile_hash: String,
}

impl CertificateDoc {
    pub fn from_certificate(cert: &CanonicalCertificate) -> Self {
        CertificateDoc {
            canonical: tensor_to_document(&cert.canonical),
            frame: matrix_strings(&cert.frame),
            generic: cert.generic,
            profile_hash: cert.profile_hash.clone(),
        }
    }
}

/// An isomorphism verdict in document form.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictDoc {
    pub equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<String>>>,
}

/// A failed profile search in document form: the per-k evidence table.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionDoc {
    pub m: usize,
    pub symmetry: String,
    pub k_max: usize,
    pub max_rank: usize,
    pub attempts: Vec<KAttempt>,
}

/// One law suite's outcome inside a selftest run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteResultDoc {
    pub config: String,
    pub suite: String,
    pub passed: bool,
    pub detail: String,
}

/// The selftest section of a result document.
#[derive(Debug, Clone, Serialize)]
pub struct SelftestDoc {
    pub configs: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResultDoc>,
}

/// The single stdout artifact of every subcommand: command echo plus the
/// sections the command produced. Self-contained and byte-stable.
#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub format_version: u32,
    pub command: String,
    pub argv: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_hash: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_report: Option<RankReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumption_violation: Option<AssumptionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genericity: Option<GenericityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selftest: Option<SelftestDoc>,
    pub diagnostics: Vec<String>,
    pub seeds: Vec<u64>,
}

impl ResultDocument {
    pub fn new(command: &str, argv: &[String]) -> Self {
        ResultDocument {
            format_version: FORMAT_VERSION,
            command: command.to_string(),
            argv: argv.to_vec(),
            profile_hash: None,
            certificate: None,
            verdict: None,
            rank_report: None,
            assumption_violation: None,
            genericity: None,
            selftest: None,
            diagnostics: Vec::new(),
            seeds: Vec::new(),
        }
    }
}
