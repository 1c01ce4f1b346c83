//! The deterministic law-suite engine behind `selftest` and the acceptance
//! tests: draws seeded random (g, A) pairs for a profile's configuration and
//! checks every canonicalization law with exact equality.

use canonalg::{
    act, canonical_form, is_generic, iso_test, q_matrix, random_basis_change, random_tensor, trace,
    BasisChange, CanonProfile, Matrix, Result, Scalar, ScalarKind, SymmetryClass,
};

use crate::doc::SuiteResultDoc;

/// `"m<m>-<class>"`, e.g. `"m3-general"`.
pub fn config_name(m: usize, sym: SymmetryClass) -> String {
    format!("m{m}-{sym}")
}

/// Inverse of [`config_name`].
pub fn parse_config(s: &str) -> Result<(usize, SymmetryClass)> {
    let err = || canonalg::CanonError::ParseError {
        location: "configs".into(),
        message: format!("expected \"m<dim>-<class>\" (e.g. \"m2-general\"), got {s:?}"),
    };
    let rest = s.strip_prefix('m').ok_or_else(err)?;
    let (m_str, sym_str) = rest.split_once('-').ok_or_else(err)?;
    let m: usize = m_str.parse().map_err(|_| err())?;
    let sym = SymmetryClass::parse(sym_str)?;
    Ok((m, sym))
}

/// Deterministic per-trial seed derivation from the run seed.
fn mix(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(i)
}

struct Law {
    name: &'static str,
    runs: usize,
    fails: usize,
    first_fail: Option<u64>,
}

impl Law {
    fn new(name: &'static str) -> Self {
        Law {
            name,
            runs: 0,
            fails: 0,
            first_fail: None,
        }
    }

    fn check(&mut self, ok: bool, seed: u64) {
        self.runs += 1;
        if !ok {
            self.fails += 1;
            if self.first_fail.is_none() {
                self.first_fail = Some(seed);
            }
        }
    }

    fn result(&self, config: &str) -> SuiteResultDoc {
        let detail = match self.first_fail {
            None => format!("{} trials, exact equality on all", self.runs),
            Some(s) => format!(
                "{} of {} trials failed; first failure at tensor seed {s}",
                self.fails, self.runs
            ),
        };
        SuiteResultDoc {
            config: config.to_string(),
            suite: self.name.to_string(),
            passed: self.fails == 0,
            detail,
        }
    }
}

fn kron_pow(mat: &Matrix<Scalar>, k: usize) -> Result<Matrix<Scalar>> {
    let mut out = mat.clone();
    for _ in 1..k {
        out = out.kron(mat)?;
    }
    Ok(out)
}

/// Run every law suite for one profile over one scalar kind. All randomness
/// derives from `seed`; two runs with equal arguments give equal results.
///
/// Laws, checked with exact equality on each trial (B = act(g, A)):
/// trace covariance Tr(B) = Tr(A)·g⁻¹, Q covariance Q(B) = Q(A)·(g⁻¹)^⊗k,
/// genericity invariance, frame equivariance P(B) = P(A)·g⁻¹, invariance
/// C(B) = C(A), idempotence C(C(A)) = C(A), identity frame P(C(A)) = I,
/// witness recovery iso_test(A, B) = (equivalent, g), pairwise separation of
/// canonical forms of independent draws (capped at 50), and a ≥ 90 %
/// genericity fraction among the draws.
pub fn run_suites(
    profile: &CanonProfile,
    kind: ScalarKind,
    trials: usize,
    seed: u64,
) -> Result<Vec<SuiteResultDoc>> {
    let config = match kind {
        ScalarKind::Rational => format!("{}-rational", config_name(profile.m, profile.sym)),
        ScalarKind::Fp(p) => format!("{}-fp{p}", config_name(profile.m, profile.sym)),
    };
    let m = profile.m;

    let mut trace_cov = Law::new("trace_covariance");
    let mut q_cov = Law::new("q_covariance");
    let mut gen_inv = Law::new("genericity_invariance");
    let mut p_equi = Law::new("frame_equivariance");
    let mut c_inv = Law::new("canonical_invariance");
    let mut idem = Law::new("idempotence");
    let mut id_frame = Law::new("identity_frame");
    let mut witness = Law::new("witness_recovery");
    let mut separation = Law::new("separation");

    let mut generic_count = 0usize;
    let mut seen_forms: Vec<Matrix<Scalar>> = Vec::new();

    for i in 0..trials {
        let a_seed = mix(seed, 2 * i as u64);
        let g_seed = mix(seed, 2 * i as u64 + 1);
        let a = random_tensor(m, profile.sym, kind, a_seed)?;
        let g = random_basis_change(m, kind, g_seed)?;
        let b = act(&g, &a)?;
        let ginv = g.matrix().inverse()?;

        for slot in [1u8, 2] {
            let lhs = trace(&b, slot)?;
            let rhs = trace(&a, slot)?.mul(&ginv)?;
            trace_cov.check(lhs == rhs, a_seed);
        }

        let qa = q_matrix(profile, &a)?;
        let qb = q_matrix(profile, &b)?;
        q_cov.check(qb == qa.mul(&kron_pow(&ginv, profile.k)?)?, a_seed);

        let ra = is_generic(profile, &a)?;
        let rb = is_generic(profile, &b)?;
        gen_inv.check(ra.generic() == rb.generic(), a_seed);
        if !(ra.generic() && rb.generic()) {
            continue;
        }
        generic_count += 1;

        let cert_a = canonical_form(profile, &a)?;
        let cert_b = canonical_form(profile, &b)?;
        p_equi.check(cert_b.frame == cert_a.frame.mul(&ginv)?, a_seed);
        c_inv.check(cert_b.canonical == cert_a.canonical, a_seed);

        let cert_c = canonical_form(profile, &cert_a.canonical)?;
        idem.check(cert_c.canonical == cert_a.canonical, a_seed);
        id_frame.check(cert_c.frame.is_identity(), a_seed);

        let verdict = iso_test(profile, &a, &b)?;
        witness.check(
            verdict.equivalent
                && verdict
                    .witness
                    .as_ref()
                    .map(BasisChange::matrix)
                    .is_some_and(|w| w == g.matrix()),
            a_seed,
        );

        if seen_forms.len() < 50 {
            let form = cert_a.canonical.entries().clone();
            separation.check(!seen_forms.contains(&form), a_seed);
            seen_forms.push(form);
        }
    }

    let mut out: Vec<SuiteResultDoc> = [
        &trace_cov, &q_cov, &gen_inv, &p_equi, &c_inv, &idem, &id_frame, &witness, &separation,
    ]
    .iter()
    .map(|law| law.result(&config))
    .collect();

    out.push(SuiteResultDoc {
        config: config.clone(),
        suite: "genericity_fraction".to_string(),
        passed: generic_count * 10 >= trials * 9,
        detail: format!("{generic_count} of {trials} draws generic (need ≥ 90%)"),
    });
    Ok(out)
}
