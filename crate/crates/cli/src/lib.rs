//! JSON front end for `qhm-core`: one verb per library operation, a
//! built-in regression suite, a family scan and a batch runner.
//!
//! Every document carries a manifest with the seed, tolerance and version
//! it was produced with. Documents contain no timings or other ambient
//! state, so equal inputs give byte-identical output.

pub mod family;
pub mod schema;
pub mod suite;

use std::fmt;
use std::str::FromStr;

use qhm_core::genericity::{is_generic_with, BifurcationTol};
use qhm_core::hp::{hp_equal_with, HP_TOL};
use qhm_core::moduli::{equivalent_with, EQUIV_TOL};
use qhm_core::qhfunc::{polar_curve, q_of_f};
use qhm_core::upsilon::{classes_unordered, DEFAULT_SEED};
use qhm_core::{
    classes_from_fiber, classify, count_classes, hp_canonical, hp_invariant, solve_fiber, ComplexTol, Configuration,
    GermType, SolverConfig,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

pub use family::{family_scan, FamilyError, FamilyReport, FamilyVerdict};
pub use suite::{verify_paper_suite, PaperConstants, SuiteReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
/// Some regression checks failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Classify,
    Invariant,
    Fiber,
    Classes,
    Count,
    Equiv,
    Generic,
    Family,
    VerifyPaper,
    Batch,
}

impl Verb {
    pub const ALL: [Verb; 10] = [
        Verb::Classify,
        Verb::Invariant,
        Verb::Fiber,
        Verb::Classes,
        Verb::Count,
        Verb::Equiv,
        Verb::Generic,
        Verb::Family,
        Verb::VerifyPaper,
        Verb::Batch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verb::Classify => "classify",
            Verb::Invariant => "invariant",
            Verb::Fiber => "fiber",
            Verb::Classes => "classes",
            Verb::Count => "count",
            Verb::Equiv => "equiv",
            Verb::Generic => "generic",
            Verb::Family => "family",
            Verb::VerifyPaper => "verify-paper",
            Verb::Batch => "batch",
        }
    }

    /// Whether the verb reads a payload.
    pub fn takes_payload(self) -> bool {
        self != Verb::VerifyPaper
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Verb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Verb::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| format!("unknown verb `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Comparison tolerance; `None` keeps the library defaults.
    pub tol: Option<f64>,
    /// Treat fiber targets as unordered.
    pub permute_targets: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, tol: None, permute_targets: false }
    }
}

impl RunConfig {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig::with_seed(self.seed)
    }

    pub fn hp_tol(&self) -> ComplexTol {
        self.tol.map_or(HP_TOL, |t| ComplexTol::new(HP_TOL.atol, t))
    }

    pub fn equiv_tol(&self) -> ComplexTol {
        self.tol.map_or(EQUIV_TOL, ComplexTol::uniform)
    }

    pub fn bifurcation_tol(&self) -> BifurcationTol {
        let mut b = BifurcationTol::default();
        if let Some(t) = self.tol {
            b.tol = t;
        }
        b
    }

    fn effective_tol(&self) -> f64 {
        self.tol.unwrap_or(EQUIV_TOL.rtol)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub version: &'static str,
    pub verb: Verb,
    pub seed: u64,
    pub tol: f64,
    pub permute_targets: bool,
    pub solver: SolverConfig,
}

impl Manifest {
    pub fn new(verb: Verb, cfg: &RunConfig) -> Self {
        Self {
            version: VERSION,
            verb,
            seed: cfg.seed,
            tol: cfg.effective_tol(),
            permute_targets: cfg.permute_targets,
            solver: cfg.solver(),
        }
    }
}

/// A finished run: the document to print and the process exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub document: Value,
    pub code: i32,
}

impl Outcome {
    /// Pretty JSON followed by a newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.document).expect("documents are plain JSON");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub kind: &'static str,
    /// Location of the offending field, `.` for the whole payload.
    pub path: String,
    pub message: String,
}

impl RunError {
    fn input(message: impl fmt::Display) -> Self {
        Self { kind: "input", path: ".".into(), message: message.to_string() }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error at {}: {}", self.kind, self.path, self.message)
    }
}

/// Parse `payload` as `T`, reporting the path of the first bad field.
pub fn parse_payload<T: DeserializeOwned>(payload: &str) -> Result<T, RunError> {
    let mut de = serde_json::Deserializer::from_str(payload);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        RunError { kind: "schema", path, message: e.into_inner().to_string() }
    })?;
    de.end().map_err(|e| RunError { kind: "schema", path: ".".into(), message: e.to_string() })?;
    Ok(value)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

/// Run one verb. Batch payloads are newline-delimited job records and the
/// result lists one document per job.
pub fn run(verb: Verb, payload: &str, cfg: &RunConfig) -> Outcome {
    let manifest = to_value(&Manifest::new(verb, cfg));
    if verb == Verb::Batch {
        let batch = run_batch(payload, cfg);
        return Outcome {
            document: json!({ "manifest": manifest, "result": { "jobs": batch.documents } }),
            code: batch.code,
        };
    }
    match dispatch(verb, payload, cfg) {
        Ok((result, code)) => Outcome { document: json!({ "manifest": manifest, "result": result }), code },
        Err(e) => Outcome {
            document: json!({
                "manifest": manifest,
                "error": { "kind": e.kind, "path": e.path, "message": e.message },
            }),
            code: EXIT_INPUT,
        },
    }
}

fn dispatch(verb: Verb, payload: &str, cfg: &RunConfig) -> Result<(Value, i32), RunError> {
    use schema::*;
    let ok = |v: Value| Ok((v, EXIT_OK));
    match verb {
        Verb::Classify => {
            let f = parse_payload::<GermPayload>(payload)?.germ.0;
            let polar = polar_curve(&f);
            ok(json!({
                "classification": classify(&f),
                "n": f.n(),
                "weights": f.weights(),
                "m": f.m(),
                "k": f.k(),
                "weighted_degree": f.weighted_degree(),
                "poly": q_of_f(&f),
                "kappa": polar.kappas.as_slice(),
                "has_y_branch": polar.has_y_branch,
            }))
        }
        Verb::Invariant => {
            let f = parse_payload::<GermPayload>(payload)?.germ.0;
            let inv = hp_invariant(&f).map_err(RunError::input)?;
            let canonical = hp_canonical(&inv);
            ok(json!({
                "invariant": inv,
                "canonical": canonical.values,
                "key": canonical.key.fingerprint(),
                "degenerate": canonical.degenerate,
                "c_ratios": inv.c_ratios(),
                "h_exponents": inv.h_exponents(),
            }))
        }
        Verb::Fiber => {
            let t = parse_payload::<TargetPayload>(payload)?;
            let fiber = solve_fiber(&t.target, &cfg.solver()).map_err(RunError::input)?;
            let code = if fiber.incomplete { EXIT_INCOMPLETE } else { EXIT_OK };
            Ok((to_value(&fiber), code))
        }
        Verb::Classes => {
            let t = parse_payload::<TargetPayload>(payload)?;
            let solver = cfg.solver();
            if cfg.permute_targets {
                let classes = classes_unordered(&t.target, &solver).map_err(RunError::input)?;
                return ok(json!({ "target": t.target, "unordered": true, "classes": classes }));
            }
            let fiber = solve_fiber(&t.target, &solver).map_err(RunError::input)?;
            let code = if fiber.incomplete { EXIT_INCOMPLETE } else { EXIT_OK };
            let classes = if fiber.degenerate {
                vec![]
            } else {
                classes_from_fiber(&fiber, t.sigma_n).map_err(RunError::input)?
            };
            Ok((
                json!({
                    "target": t.target,
                    "unordered": false,
                    "degenerate": fiber.degenerate,
                    "degeneracy": fiber.degeneracy,
                    "solutions": fiber.finite().count(),
                    "classes": classes,
                }),
                code,
            ))
        }
        Verb::Count => {
            let t = parse_payload::<TargetPayload>(payload)?;
            let (count, fiber) = count_classes(&t.target, &cfg.solver()).map_err(RunError::input)?;
            let code = if count.incomplete { EXIT_INCOMPLETE } else { EXIT_OK };
            Ok((
                json!({
                    "target": t.target,
                    "count": count,
                    "bezout": fiber.bezout,
                    "diverged_paths": fiber.diverged_paths(),
                }),
                code,
            ))
        }
        Verb::Equiv => {
            let pair = parse_payload::<PairPayload>(payload)?;
            let (a, b) = (pair.a.0, pair.b.0);
            if a.germ_type() != b.germ_type() || a.n() != b.n() {
                return Err(RunError::input(format!(
                    "germs differ in type or n: ({}, {}) vs ({}, {})",
                    a.germ_type(),
                    a.n(),
                    b.germ_type(),
                    b.n()
                )));
            }
            let ty = a.germ_type();
            let e = equivalent_with(&Configuration::of_germ(&a), &Configuration::of_germ(&b), ty, cfg.equiv_tol())
                .map_err(RunError::input)?;
            let hp = if ty == GermType::I {
                None
            } else {
                let (ha, hb) = (hp_invariant(&a).map_err(RunError::input)?, hp_invariant(&b).map_err(RunError::input)?);
                Some(hp_equal_with(&ha, &hb, cfg.hp_tol()).map_err(RunError::input)?)
            };
            ok(json!({ "type": ty, "equivalent": e.equivalent, "witness": e.witness, "hp_equal": hp }))
        }
        Verb::Generic => {
            let f = parse_payload::<GermPayload>(payload)?.germ.0;
            ok(to_value(&is_generic_with(&f, &cfg.bifurcation_tol())))
        }
        Verb::Family => {
            let fam = parse_payload::<FamilyPayload>(payload)?;
            let samples: Vec<_> = fam.samples.into_iter().map(|s| (s.t, s.germ.0)).collect();
            let report = family_scan(&samples, cfg).map_err(RunError::input)?;
            ok(to_value(&report))
        }
        Verb::VerifyPaper => {
            let report = verify_paper_suite(&PaperConstants::default(), cfg);
            let code = if report.all_passed { EXIT_OK } else { EXIT_CHECK_FAILED };
            Ok((to_value(&report), code))
        }
        Verb::Batch => unreachable!("handled by run"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchOutcome {
    /// One document per non-empty input line, in input order.
    pub documents: Vec<Value>,
    /// Largest exit code over all jobs.
    pub code: i32,
    /// Per-job output paths requested by the records, aligned with
    /// `documents`.
    pub outputs: Vec<Option<String>>,
}

/// Run newline-delimited job records. Each record may override the seed,
/// tolerance and ordering mode of `cfg`.
pub fn run_batch(text: &str, cfg: &RunConfig) -> BatchOutcome {
    let mut documents = vec![];
    let mut outputs = vec![];
    let mut code = EXIT_OK;
    for (lineno, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let (doc, c, out) = match parse_payload::<schema::JobRecord>(line) {
            Err(e) => (batch_error(cfg, lineno, &e), EXIT_INPUT, None),
            Ok(job) => {
                let mut job_cfg = cfg.clone();
                job_cfg.seed = job.config.seed.unwrap_or(cfg.seed);
                job_cfg.tol = job.config.tol.or(cfg.tol);
                job_cfg.permute_targets = job.config.permute_targets.unwrap_or(cfg.permute_targets);
                match job.verb.parse::<Verb>() {
                    Ok(Verb::Batch) | Err(_) => {
                        let e = RunError {
                            kind: "schema",
                            path: "verb".into(),
                            message: format!("unsupported verb `{}`", job.verb),
                        };
                        (batch_error(cfg, lineno, &e), EXIT_INPUT, job.out)
                    }
                    Ok(verb) => {
                        let payload = if verb.takes_payload() { job.payload.to_string() } else { String::new() };
                        let mut o = run(verb, &payload, &job_cfg);
                        o.document["job"] = json!(lineno + 1);
                        (o.document, o.code, job.out)
                    }
                }
            }
        };
        code = code.max(c);
        documents.push(doc);
        outputs.push(out);
    }
    BatchOutcome { documents, code, outputs }
}

fn batch_error(cfg: &RunConfig, lineno: usize, e: &RunError) -> Value {
    json!({
        "manifest": Manifest::new(Verb::Batch, cfg),
        "job": lineno + 1,
        "error": { "kind": e.kind, "path": e.path, "message": e.message },
    })
}
