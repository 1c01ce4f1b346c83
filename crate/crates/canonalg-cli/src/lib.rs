//! Command-line surface for the `canonalg` library.
//!
//! Six subcommands — `profile`, `canon`, `iso`, `rank`, `gen`, `selftest` —
//! read and write canonical JSON documents (sorted keys, no insignificant
//! whitespace, rationals in lowest terms). All randomness flows from
//! explicit seeds; byte-identical inputs and seeds give byte-identical
//! outputs.
//!
//! Exit codes: 0 success (for `iso`: equivalent), 1 not equivalent (or
//! failed selftest suites), 2 non-generic input or probe (the method
//! abstains), 3 no admissible profile (assumption violation), 64 usage or
//! input errors, 70 internal invariant failures.

pub mod doc;
pub mod engine;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use canonalg::{
    build_profile, canonical_form, iso_test, jacobian_rank, random_tensor, CanonError,
    CanonProfile, JacobianMap, RankReport, Result, ScalarKind, StructureTensor, SymmetryClass,
    PROBE_PRIME,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use doc::{
    canonical_json, parse_field, parse_tensor, tensor_to_document, AssumptionDoc, CertificateDoc,
    ResultDocument, SelftestDoc, TensorDocument, VerdictDoc,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_EQUIVALENT: i32 = 1;
pub const EXIT_NON_GENERIC: i32 = 2;
pub const EXIT_ASSUMPTION_VIOLATION: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser)]
#[command(
    name = "canonalg",
    version,
    about = "Canonical forms and isomorphism witnesses for algebras given by structural constants",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a canonicalization profile and write it to a file
    Profile(ProfileArgs),
    /// Canonicalize a tensor under a profile; print the certificate
    Canon(CanonArgs),
    /// Decide isomorphism of two tensors; print verdict and witness
    Iso(IsoArgs),
    /// Measure Jacobian ranks of the canonical or frame map
    Rank(RankArgs),
    /// Generate a seeded random tensor document
    Gen(GenArgs),
    /// Run the deterministic law suites; exit 0 iff all pass
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// Algebra dimension (m ≥ 2)
    #[arg(long)]
    m: usize,
    /// Symmetry class: general | commutative | anticommutative
    #[arg(long)]
    sym: String,
    /// Probe seed for the build
    #[arg(long)]
    seed: u64,
    /// Highest contraction power to try (default m + 3)
    #[arg(long = "k-max")]
    k_max: Option<usize>,
    /// Output file for the profile JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CanonArgs {
    /// Profile JSON file
    #[arg(long)]
    profile: PathBuf,
    /// Tensor document to canonicalize
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct IsoArgs {
    /// Profile JSON file
    #[arg(long)]
    profile: PathBuf,
    /// First tensor document
    a: PathBuf,
    /// Second tensor document
    b: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    /// Profile JSON file
    #[arg(long)]
    profile: PathBuf,
    /// Which map to differentiate: canonical | frame
    #[arg(long)]
    map: String,
    /// Comma-separated starting seeds, e.g. 1,2,3
    #[arg(long)]
    seeds: String,
    /// Prime field for the measurement (default 2^61 − 1; must exceed 2^60)
    #[arg(long)]
    prime: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    /// Algebra dimension (m ≥ 2)
    #[arg(long)]
    m: usize,
    /// Symmetry class: general | commutative | anticommutative
    #[arg(long)]
    sym: String,
    /// Scalar field: rational | fp:<p>
    #[arg(long)]
    field: String,
    /// Draw seed
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct SelftestArgs {
    /// Comma-separated configurations (default "m2-general,m3-general")
    #[arg(long)]
    configs: Option<String>,
    /// Trials per configuration over the prime field (rationals get 1/10)
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Run seed; all trial seeds derive from it
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// Run the CLI against explicit writers; `argv[0]` is the program name.
/// Returns the process exit code. This is the in-process entry point the
/// tests use; `main` wires it to the real stdio.
pub fn run_with_writers(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            }
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).cloned().collect();
    let mut ctx = Ctx { echo, out, err };
    match cli.cmd {
        Cmd::Profile(a) => cmd_profile(&mut ctx, a),
        Cmd::Canon(a) => cmd_canon(&mut ctx, a),
        Cmd::Iso(a) => cmd_iso(&mut ctx, a),
        Cmd::Rank(a) => cmd_rank(&mut ctx, a),
        Cmd::Gen(a) => cmd_gen(&mut ctx, a),
        Cmd::Selftest(a) => cmd_selftest(&mut ctx, a),
    }
}

/// Convenience wrapper over real stdout/stderr.
pub fn run(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_writers(argv, &mut stdout.lock(), &mut stderr.lock())
}

struct Ctx<'a> {
    echo: Vec<String>,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn doc(&self, command: &str) -> ResultDocument {
        ResultDocument::new(command, &self.echo)
    }

    /// Canonical bytes plus a trailing newline on the stream.
    fn emit(&mut self, doc: &ResultDocument) {
        let bytes = canonical_json(doc);
        let _ = self.out.write_all(&bytes);
        let _ = self.out.write_all(b"\n");
    }

    fn usage(&mut self, message: impl AsRef<str>) -> i32 {
        let _ = writeln!(self.err, "error: {}", message.as_ref());
        EXIT_USAGE
    }

    /// Map a library error to the exit-code protocol. Non-generic outcomes
    /// are handled by callers that owe a stdout report; everything landing
    /// here goes to stderr only.
    fn fail(&mut self, e: CanonError) -> i32 {
        let code = exit_code_for(&e);
        let _ = writeln!(self.err, "error: {e}");
        code
    }
}

fn exit_code_for(e: &CanonError) -> i32 {
    match e {
        CanonError::ParseError { .. }
        | CanonError::SymmetryViolation { .. }
        | CanonError::UnsupportedField(_)
        | CanonError::DimensionMismatch(_)
        | CanonError::ProfileMismatch(_) => EXIT_USAGE,
        CanonError::NonGenericInput(_) | CanonError::NonGenericProbe { .. } => EXIT_NON_GENERIC,
        CanonError::AssumptionViolation { .. } => EXIT_ASSUMPTION_VIOLATION,
        CanonError::DivisionByZero
        | CanonError::KindMismatch(_)
        | CanonError::SingularMatrix
        | CanonError::NonInvertibleDual
        | CanonError::WitnessVerificationFailure(_) => EXIT_INTERNAL,
    }
}

fn load_profile(path: &Path) -> Result<CanonProfile> {
    let bytes = fs::read(path).map_err(|e| CanonError::ParseError {
        location: path.display().to_string(),
        message: format!("cannot read profile: {e}"),
    })?;
    CanonProfile::from_json(&bytes)
}

fn load_tensor(path: &Path) -> Result<StructureTensor> {
    let bytes = fs::read(path).map_err(|e| CanonError::ParseError {
        location: path.display().to_string(),
        message: format!("cannot read tensor: {e}"),
    })?;
    let document: TensorDocument =
        serde_json::from_slice(&bytes).map_err(|e| CanonError::ParseError {
            location: path.display().to_string(),
            message: format!("invalid tensor document: {e}"),
        })?;
    parse_tensor(&document)
}

fn cmd_profile(ctx: &mut Ctx, args: ProfileArgs) -> i32 {
    let sym = match SymmetryClass::parse(&args.sym) {
        Ok(s) => s,
        Err(e) => return ctx.fail(e),
    };
    match build_profile(args.m, sym, args.seed, args.k_max) {
        Ok(profile) => {
            if let Err(e) = fs::write(&args.out, profile.to_canonical_json()) {
                return ctx.usage(format!("cannot write {}: {e}", args.out.display()));
            }
            let mut doc = ctx.doc("profile");
            doc.profile_hash = Some(profile.profile_hash.clone());
            doc.seeds = vec![args.seed];
            doc.diagnostics = vec![
                format!("profile written to {}", args.out.display()),
                format!(
                    "m = {}, class = {}, k = {}, schemes = {}, frame_source = {}, frame_columns = {:?}",
                    profile.m,
                    profile.sym,
                    profile.k,
                    profile.q_schemes.len(),
                    profile.frame_source,
                    profile.frame_columns
                ),
            ];
            ctx.emit(&doc);
            EXIT_OK
        }
        Err(CanonError::AssumptionViolation {
            m,
            sym,
            k_max,
            max_rank,
            attempts,
        }) => {
            let mut doc = ctx.doc("profile");
            doc.seeds = vec![args.seed];
            doc.diagnostics = vec![format!(
                "no admissible contraction power k ≤ {k_max} for m = {m}, class = {sym}: \
                 the best distinct-row pool has rank {max_rank}, short of the m^k required \
                 for an invertible Q"
            )];
            doc.assumption_violation = Some(AssumptionDoc {
                m,
                symmetry: sym,
                k_max,
                max_rank,
                attempts,
            });
            ctx.emit(&doc);
            EXIT_ASSUMPTION_VIOLATION
        }
        Err(e) => ctx.fail(e),
    }
}

fn cmd_canon(ctx: &mut Ctx, args: CanonArgs) -> i32 {
    let profile = match load_profile(&args.profile) {
        Ok(p) => p,
        Err(e) => return ctx.fail(e),
    };
    let a = match load_tensor(&args.input) {
        Ok(a) => a,
        Err(e) => return ctx.fail(e),
    };
    match canonical_form(&profile, &a) {
        Ok(cert) => {
            let mut doc = ctx.doc("canon");
            doc.profile_hash = Some(cert.profile_hash.clone());
            doc.certificate = Some(CertificateDoc::from_certificate(&cert));
            ctx.emit(&doc);
            EXIT_OK
        }
        Err(CanonError::NonGenericInput(report)) => {
            let mut doc = ctx.doc("canon");
            doc.profile_hash = Some(profile.profile_hash.clone());
            doc.genericity = Some(report);
            doc.diagnostics = vec![
                "input tensor is not generic for this profile; the method abstains".to_string(),
            ];
            ctx.emit(&doc);
            EXIT_NON_GENERIC
        }
        Err(e) => ctx.fail(e),
    }
}

fn cmd_iso(ctx: &mut Ctx, args: IsoArgs) -> i32 {
    let profile = match load_profile(&args.profile) {
        Ok(p) => p,
        Err(e) => return ctx.fail(e),
    };
    let a = match load_tensor(&args.a) {
        Ok(a) => a,
        Err(e) => return ctx.fail(e),
    };
    let b = match load_tensor(&args.b) {
        Ok(b) => b,
        Err(e) => return ctx.fail(e),
    };
    if a.kind() != b.kind() {
        return ctx.usage(format!(
            "tensor documents use different fields ({} vs {}); comparison would be meaningless",
            a.kind(),
            b.kind()
        ));
    }
    match iso_test(&profile, &a, &b) {
        Ok(verdict) => {
            let mut doc = ctx.doc("iso");
            doc.profile_hash = Some(profile.profile_hash.clone());
            let code = if verdict.equivalent {
                EXIT_OK
            } else {
                EXIT_NOT_EQUIVALENT
            };
            doc.verdict = Some(VerdictDoc {
                equivalent: verdict.equivalent,
                witness: verdict
                    .witness
                    .as_ref()
                    .map(|w| doc::matrix_strings(w.matrix())),
            });
            ctx.emit(&doc);
            code
        }
        Err(CanonError::NonGenericInput(report)) => {
            let mut doc = ctx.doc("iso");
            doc.profile_hash = Some(profile.profile_hash.clone());
            doc.genericity = Some(report);
            doc.diagnostics = vec![
                "an input tensor is not generic for this profile; the method abstains".to_string(),
            ];
            ctx.emit(&doc);
            EXIT_NON_GENERIC
        }
        Err(e) => ctx.fail(e),
    }
}

fn cmd_rank(ctx: &mut Ctx, args: RankArgs) -> i32 {
    let profile = match load_profile(&args.profile) {
        Ok(p) => p,
        Err(e) => return ctx.fail(e),
    };
    let map = match args.map.as_str() {
        "canonical" => JacobianMap::Canonical,
        "frame" => JacobianMap::Frame,
        other => return ctx.usage(format!("--map must be canonical or frame, got {other:?}")),
    };
    let mut seeds: Vec<u64> = Vec::new();
    for part in args.seeds.split(',') {
        match part.trim().parse() {
            Ok(s) => seeds.push(s),
            Err(_) => return ctx.usage(format!("--seeds must be comma-separated integers, got {part:?}")),
        }
    }
    if seeds.is_empty() {
        return ctx.usage("--seeds must list at least one seed");
    }
    let prime = args.prime.unwrap_or(PROBE_PRIME);

    let mut merged: Option<RankReport> = None;
    for &s in &seeds {
        match jacobian_rank(&profile, map, s, prime) {
            Ok(report) => match &mut merged {
                None => merged = Some(report),
                Some(acc) => {
                    acc.measured_rank = acc.measured_rank.max(report.measured_rank);
                    for s in report.seeds {
                        if !acc.seeds.contains(&s) {
                            acc.seeds.push(s);
                        }
                    }
                }
            },
            Err(e @ CanonError::NonGenericProbe { .. }) => {
                let mut doc = ctx.doc("rank");
                doc.profile_hash = Some(profile.profile_hash.clone());
                doc.diagnostics = vec![format!("{e}")];
                doc.seeds = seeds.clone();
                ctx.emit(&doc);
                return EXIT_NON_GENERIC;
            }
            Err(e) => return ctx.fail(e),
        }
    }
    let report = merged.expect("at least one seed");
    let mut doc = ctx.doc("rank");
    doc.profile_hash = Some(profile.profile_hash.clone());
    doc.seeds = report.seeds.clone();
    doc.rank_report = Some(report);
    ctx.emit(&doc);
    EXIT_OK
}

fn cmd_gen(ctx: &mut Ctx, args: GenArgs) -> i32 {
    let sym = match SymmetryClass::parse(&args.sym) {
        Ok(s) => s,
        Err(e) => return ctx.fail(e),
    };
    let kind = match parse_field(&args.field) {
        Ok(k) => k,
        Err(e) => return ctx.fail(e),
    };
    match random_tensor(args.m, sym, kind, args.seed) {
        Ok(a) => {
            let bytes = canonical_json(&tensor_to_document(&a));
            let _ = ctx.out.write_all(&bytes);
            let _ = ctx.out.write_all(b"\n");
            EXIT_OK
        }
        Err(e) => ctx.fail(e),
    }
}

fn cmd_selftest(ctx: &mut Ctx, args: SelftestArgs) -> i32 {
    let configs_str = args
        .configs
        .clone()
        .unwrap_or_else(|| "m2-general,m3-general".to_string());
    let mut configs: Vec<(String, usize, SymmetryClass)> = Vec::new();
    for part in configs_str.split(',') {
        let name = part.trim();
        match engine::parse_config(name) {
            Ok((m, sym)) => configs.push((name.to_string(), m, sym)),
            Err(e) => return ctx.fail(e),
        }
    }
    if args.trials == 0 {
        return ctx.usage("--trials must be positive");
    }

    let mut suites: Vec<doc::SuiteResultDoc> = Vec::new();
    let mut violation_failures = 0usize;
    for (name, m, sym) in &configs {
        match build_profile(*m, *sym, 1, None) {
            Ok(profile) => {
                let fp = ScalarKind::Fp(canonalg::DEFAULT_PRIME);
                match engine::run_suites(&profile, fp, args.trials, args.seed) {
                    Ok(rs) => suites.extend(rs),
                    Err(e) => return ctx.fail(e),
                }
                let rational_trials = (args.trials / 10).max(1);
                match engine::run_suites(
                    &profile,
                    ScalarKind::Rational,
                    rational_trials,
                    args.seed,
                ) {
                    Ok(rs) => suites.extend(rs),
                    Err(e) => return ctx.fail(e),
                }
            }
            Err(CanonError::AssumptionViolation {
                k_max, max_rank, ..
            }) => {
                violation_failures += 1;
                suites.push(doc::SuiteResultDoc {
                    config: name.clone(),
                    suite: "profile_build".to_string(),
                    passed: false,
                    detail: format!(
                        "no admissible k ≤ {k_max}: best distinct-row rank {max_rank} \
                         is below the m^k required for an invertible Q"
                    ),
                });
            }
            Err(e) => return ctx.fail(e),
        }
    }

    let failed: Vec<&doc::SuiteResultDoc> = suites.iter().filter(|s| !s.passed).collect();
    let mut doc = ctx.doc("selftest");
    doc.seeds = vec![args.seed];
    doc.diagnostics = failed
        .iter()
        .map(|s| format!("{}/{}: FAILED — {}", s.config, s.suite, s.detail))
        .collect();
    let passed = failed.is_empty();
    let failed_count = failed.len();
    doc.selftest = Some(SelftestDoc {
        configs: configs.iter().map(|(n, _, _)| n.clone()).collect(),
        trials: args.trials,
        seed: args.seed,
        passed,
        suites,
    });
    ctx.emit(&doc);
    if passed {
        EXIT_OK
    } else if violation_failures == failed_count {
        EXIT_ASSUMPTION_VIOLATION
    } else {
        EXIT_NOT_EQUIVALENT
    }
}
