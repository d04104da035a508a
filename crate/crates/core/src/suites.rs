//! Verification suites and their JSON reports.
//!
//! Every suite is a pure function of `(RunConfig, torus)`; random choices
//! come from a ChaCha stream seeded by the config seed and the suite name,
//! so a report depends only on its inputs. Wall time is measured but kept
//! out of the serialized report.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cuspidal::{self, build_module, tensor_field_module, CuspidalModule, OperatorFamily};
use crate::cyclo::CycloNum;
use crate::error::{Error, Result};
use crate::expr::format_element;
use crate::gtilde::{self, GElement, GKey};
use crate::liealg::{self, DElement, DKey, SolenoidalFlavor, SolenoidalSpec, WdElement};
use crate::matrep;
use crate::matrix::ExactMatrix;
use crate::repn::{self, GLdGLNModule, GRepresentation};
use crate::torus::{ExpVec, SigmaConvention, TorusSpec, TorusSpecFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Xmatrix,
    Brackets,
    Solenoidal,
    JacobiGtilde,
    Quotient,
    Annihilation,
    ModuleAxioms,
    OperatorRelations,
    TensorCompare,
    Roundtrip,
    Decompose,
    Cuspidality,
    Irreducibility,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Xmatrix,
        Suite::Brackets,
        Suite::Solenoidal,
        Suite::JacobiGtilde,
        Suite::Quotient,
        Suite::Annihilation,
        Suite::ModuleAxioms,
        Suite::OperatorRelations,
        Suite::TensorCompare,
        Suite::Roundtrip,
        Suite::Decompose,
        Suite::Cuspidality,
        Suite::Irreducibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Xmatrix => "xmatrix",
            Suite::Brackets => "brackets",
            Suite::Solenoidal => "solenoidal",
            Suite::JacobiGtilde => "jacobi-gtilde",
            Suite::Quotient => "quotient",
            Suite::Annihilation => "annihilation",
            Suite::ModuleAxioms => "module-axioms",
            Suite::OperatorRelations => "operator-relations",
            Suite::TensorCompare => "tensor-compare",
            Suite::Roundtrip => "roundtrip",
            Suite::Decompose => "decompose",
            Suite::Cuspidality => "cuspidality",
            Suite::Irreducibility => "irreducibility",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite `{s}`")))
    }
}

/// `(d, z, k)` presets used throughout the tests and as CLI defaults.
pub fn preset(name: &str) -> Result<TorusSpec> {
    match name {
        "e1" => TorusSpec::new(2, 1, vec![2], None),
        "e2" => TorusSpec::new(2, 1, vec![3], None),
        "e3" => TorusSpec::new(5, 2, vec![4, 2], None),
        "comm2" => TorusSpec::new(2, 0, vec![], None),
        _ => Err(Error::InvalidInput(format!("unknown preset `{name}`"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tori: Vec<TorusSpecFile>,
    pub suites: Vec<Suite>,
    /// Weight labels `s ∈ [-box_radius, box_radius]^d`.
    pub box_radius: i64,
    /// Exponent range for sampled symbols.
    pub symbol_box: i64,
    pub cusp_radius: i64,
    pub degree_bound: usize,
    pub jacobi_degree: usize,
    pub samples: usize,
    pub hom_samples: usize,
    pub seed: u64,
    pub flip_sigma: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tori: vec![preset("e1").expect("preset").to_file()],
            suites: Suite::ALL.to_vec(),
            box_radius: 3,
            symbol_box: 3,
            cusp_radius: 4,
            degree_bound: 3,
            jacobi_degree: 3,
            samples: 100,
            hom_samples: 100,
            seed: 7,
            flip_sigma: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tori.is_empty() || self.suites.is_empty() {
            return Err(Error::InvalidInput("a run needs at least one torus and one suite".into()));
        }
        if self.box_radius <= 0 || self.symbol_box <= 0 || self.cusp_radius <= 0 {
            return Err(Error::InvalidInput("radii must be positive".into()));
        }
        if self.degree_bound == 0 || self.jacobi_degree == 0 || self.samples == 0 || self.hom_samples == 0 {
            return Err(Error::InvalidInput("degree bounds and sample counts must be positive".into()));
        }
        for t in &self.tori {
            TorusSpec::from_file(t)?;
        }
        Ok(())
    }

    fn rng(&self, suite: Suite, torus: &TorusSpecFile) -> ChaCha8Rng {
        let mut h = self.seed ^ 0x9e37_79b9_7f4a_7c15;
        for b in suite.name().bytes().chain(serde_json::to_string(torus).expect("torus").bytes()) {
            h = (h ^ b as u64).wrapping_mul(0x100_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub case: String,
    /// Inputs that reproduce the failure.
    pub counterexample: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub torus: TorusSpecFile,
    pub cases: usize,
    pub passed: bool,
    pub failures: Vec<Failure>,
    /// Suite-specific measurements.
    pub details: Value,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        format!(
            "{} {} on {} ({} cases, {} failures, {:.2?})",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            serde_json::to_string(&self.torus).expect("torus"),
            self.cases,
            self.failures.len(),
            self.wall_time
        )
    }
}

/// Failures are capped so reports stay small.
const MAX_FAILURES: usize = 10;

struct Outcome {
    cases: usize,
    failures: Vec<Failure>,
    details: Value,
}

impl Outcome {
    fn new() -> Self {
        Outcome { cases: 0, failures: Vec::new(), details: Value::Null }
    }

    fn fail(&mut self, case: impl Into<String>, counterexample: Value) {
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(Failure { case: case.into(), counterexample });
        }
    }

    fn check(&mut self, ok: bool, case: impl Into<String>, counterexample: Value) {
        self.cases += 1;
        if !ok {
            self.fail(case, counterexample);
        }
    }
}

pub fn run_suite(config: &RunConfig, suite: Suite, torus: &TorusSpecFile) -> VerificationReport {
    let start = Instant::now();
    let result = TorusSpec::from_file(torus).and_then(|spec| {
        let mut out = Outcome::new();
        let mut rng = config.rng(suite, torus);
        match suite {
            Suite::Xmatrix => xmatrix(config, &spec, &mut out),
            Suite::Brackets => brackets(config, &spec, &mut rng, &mut out),
            Suite::Solenoidal => solenoidal(&spec, &mut out),
            Suite::JacobiGtilde => jacobi_gtilde(config, &spec, &mut out),
            Suite::Quotient => quotient(&spec, &mut out),
            Suite::Annihilation => annihilation(&spec, &mut out),
            Suite::ModuleAxioms => module_axioms(config, &spec, &mut out),
            Suite::OperatorRelations => operator_relations(config, &spec, &mut out),
            Suite::TensorCompare => tensor_compare(config, &spec, &mut out),
            Suite::Roundtrip => roundtrip(config, &spec, &mut out),
            Suite::Decompose => decompose(config, &spec, &mut out),
            Suite::Cuspidality => cuspidality(config, &spec, &mut out),
            Suite::Irreducibility => irreducibility(&spec, &mut out),
        }
        .map(|()| out)
    });
    let out = result.unwrap_or_else(|e| {
        let mut out = Outcome::new();
        out.fail("error", json!({ "error": e.to_string() }));
        out
    });
    VerificationReport {
        suite,
        torus: torus.clone(),
        cases: out.cases,
        passed: out.failures.is_empty(),
        failures: out.failures,
        details: out.details,
        wall_time: start.elapsed(),
    }
}

/// Runs every (suite, torus) pair concurrently; the result is ordered by
/// suite, then torus, as listed in the config.
pub fn run_all(config: &RunConfig) -> Result<Vec<VerificationReport>> {
    config.validate()?;
    let jobs: Vec<(Suite, &TorusSpecFile)> =
        config.suites.iter().flat_map(|&s| config.tori.iter().map(move |t| (s, t))).collect();
    Ok(jobs.par_iter().map(|(s, t)| run_suite(config, *s, t)).collect())
}

pub fn reports_json(reports: &[VerificationReport]) -> String {
    let mut text = serde_json::to_string_pretty(reports).expect("reports serialize");
    text.push('\n');
    text
}

// ---- tori and bracket algebras ----

fn xmatrix(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let bound = 2 * spec.k().first().copied().unwrap_or(1) as i64;
    let points = (bound as usize + 1).saturating_pow(spec.d() as u32);
    if points > MAX_BOX_LABELS {
        return Err(Error::InvalidInput(format!("product-relation box has {points} points (limit {MAX_BOX_LABELS})")));
    }
    let conv = if config.flip_sigma { SigmaConvention::Flipped } else { SigmaConvention::Standard };
    let rep = matrep::verify_product_relation(spec, bound, conv);
    out.cases += rep.checked;
    if let Some((m, n)) = rep.counterexample {
        out.fail("product relation X^m X^n = σ(m,n) X^{m+n}", json!({ "m": m, "n": n, "flipped": config.flip_sigma }));
    }
    let v = matrep::radical_identity_violation(spec, bound);
    out.check(v.is_none(), "X^n = I for n in R", json!({ "n": v }));
    let span = matrep::gamma0_span_dim(spec);
    let n2 = spec.n() * spec.n();
    out.check(span == n2, "dim span{X^w} = N^2", json!({ "span": span, "expected": n2 }));
    out.details = json!({ "box": bound, "span_dim": span, "N": spec.n() });
    Ok(())
}

fn d_key_text(k: &DKey) -> String {
    k.to_string()
}

fn brackets(config: &RunConfig, spec: &TorusSpec, rng: &mut ChaCha8Rng, out: &mut Outcome) -> Result<()> {
    let one = CycloNum::one(spec.field());
    let bound = config.symbol_box;
    let triples = 2 * config.samples;
    for _ in 0..triples {
        let keys: Vec<DKey> = (0..3).map(|_| liealg::random_d_key(spec, rng, bound)).collect();
        let el: Vec<DElement> = keys.iter().map(|k| DElement::single(k.clone(), one.clone())).collect();
        let mut err = None;
        let defect = liealg::jacobi_defect(&el[0], &el[1], &el[2], |a, b| {
            liealg::bracket_d(spec, a, b).unwrap_or_else(|e| {
                err = Some(e);
                DElement::zero()
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        let keys: Vec<String> = keys.iter().map(d_key_text).collect();
        out.check(defect.is_zero(), "Jacobi in D", json!({ "triple": keys, "defect": format_element(&defect) }));
    }
    let d = spec.d();
    for _ in 0..triples {
        let keys: Vec<_> = (0..3).map(|_| liealg::random_witt_key(d, rng, bound)).collect();
        let el: Vec<WdElement> = keys.iter().map(|k| WdElement::single(k.clone(), one.clone())).collect();
        let defect = liealg::jacobi_defect(&el[0], &el[1], &el[2], liealg::bracket_wd);
        let keys: Vec<String> = keys.iter().map(ToString::to_string).collect();
        out.check(defect.is_zero(), "Jacobi in W_d", json!({ "triple": keys, "defect": format_element(&defect) }));
    }
    let deriv = |rng: &mut ChaCha8Rng| loop {
        let k = liealg::random_d_key(spec, rng, bound);
        if matches!(k, DKey::Deriv { .. }) {
            return DElement::single(k, one.clone());
        }
    };
    for _ in 0..config.hom_samples {
        let (a, b) = (deriv(rng), deriv(rng));
        let lhs = liealg::dr_to_wd(spec, &liealg::bracket_d(spec, &a, &b)?)?;
        let rhs = liealg::bracket_wd(&liealg::dr_to_wd(spec, &a)?, &liealg::dr_to_wd(spec, &b)?);
        out.check(
            lhs == rhs,
            "D_R -> W_d homomorphism",
            json!({ "a": format_element(&a), "b": format_element(&b), "image_of_bracket": format_element(&lhs), "bracket_of_images": format_element(&rhs) }),
        );
    }
    out.details = json!({ "jacobi_triples": triples, "homomorphism_pairs": config.hom_samples, "symbol_box": bound });
    Ok(())
}

fn solenoidal(spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let f = spec.field();
    guard_box(spec, 2)?;
    let mu: Vec<CycloNum> = (0..spec.d()).map(|i| CycloNum::root_of_unity(f, i as i64)).collect();
    if !liealg::is_generic(&mu) {
        out.details = json!({ "skipped": "no generic vector of this rank in Q(ζ_L)" });
        return Ok(());
    }
    for flavor in [SolenoidalFlavor::Commutative, SolenoidalFlavor::Quantum] {
        let sol = SolenoidalSpec::new(mu.clone(), flavor)?;
        let rep = liealg::solenoidal_span_check(spec, &sol, 2)?;
        out.cases += rep.pairs_checked;
        if let Some(msg) = rep.failure {
            out.fail(format!("{flavor:?} solenoidal span"), json!({ "mu": mu, "message": msg }));
        }
    }
    Ok(())
}

pub const MAX_JACOBI_BASIS: usize = 160;

fn jacobi_gtilde(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let deg = config.jacobi_degree;
    let trunc = 3 * deg + 1;
    let basis = gtilde::basis_up_to(spec, deg);
    let one = CycloNum::one(spec.field());
    let el: Vec<GElement> = basis.iter().map(|k| GElement::single(k.clone(), one.clone())).collect();
    let n = basis.len();
    if n > MAX_JACOBI_BASIS {
        return Err(Error::InvalidInput(format!("{n} basis keys up to degree {deg} (limit {MAX_JACOBI_BASIS})")));
    }
    let idx = |i: usize, j: usize| i * n + j;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let table: Vec<GElement> = pairs
        .par_iter()
        .map(|&(i, j)| gtilde::bracket_g(spec, &el[i], &el[j], trunc))
        .collect::<Result<_>>()?;
    for i in 0..n {
        for j in i..n {
            let sum = table[idx(i, j)].add(&table[idx(j, i)]);
            out.check(sum.is_zero(), "antisymmetry", json!({ "a": basis[i].to_string(), "b": basis[j].to_string() }));
        }
    }
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k)))).collect();
    let results: Vec<Result<Option<GElement>>> = triples
        .par_iter()
        .map(|&(i, j, k)| {
            let t1 = gtilde::bracket_g(spec, &el[i], &table[idx(j, k)], trunc)?;
            let t2 = gtilde::bracket_g(spec, &el[j], &table[idx(k, i)], trunc)?;
            let t3 = gtilde::bracket_g(spec, &el[k], &table[idx(i, j)], trunc)?;
            let s = t1.add(&t2).add(&t3);
            Ok((!s.is_zero()).then_some(s))
        })
        .collect();
    for (&(i, j, k), r) in triples.iter().zip(results) {
        let defect = r?;
        out.check(
            defect.is_none(),
            "Jacobi in G̃",
            json!({
                "triple": [basis[i].to_string(), basis[j].to_string(), basis[k].to_string()],
                "truncation": trunc,
                "defect": defect.map(|d| format_element(&d)),
            }),
        );
    }
    out.details = json!({ "basis_size": n, "triples": triples.len(), "max_degree": deg, "truncation": trunc });
    Ok(())
}

fn quotient(spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let one = CycloNum::one(spec.field());
    let keys = repn::degree_zero_keys(spec);
    for a in &keys {
        for b in &keys {
            let (ea, eb) = (GElement::single(a.clone(), one.clone()), GElement::single(b.clone(), one.clone()));
            let br = gtilde::bracket_g(spec, &ea, &eb, 1)?;
            let (ga, na) = gtilde::project_quotient(spec, &ea);
            let (gb, nb) = gtilde::project_quotient(spec, &eb);
            let (gc, nc) = gtilde::project_quotient(spec, &br);
            out.check(
                gc == ga.commutator(&gb) && nc == na.commutator(&nb),
                "projection is a homomorphism",
                json!({ "a": a.to_string(), "b": b.to_string(), "bracket": format_element(&br) }),
            );
        }
    }
    let positive: Vec<GKey> = gtilde::basis_up_to(spec, 2).into_iter().filter(|k| k.filtration_degree() >= 1).collect();
    for k in &positive {
        let (g, n) = gtilde::project_quotient(spec, &GElement::single(k.clone(), one.clone()));
        out.check(g.is_zero() && n.is_zero(), "positive part in the kernel", json!({ "key": k.to_string() }));
    }
    // the images of the degree-zero keys span gl_d ⊕ gl_N
    let d = spec.d();
    let nn = spec.n();
    let mut red = crate::matrix::RowReducer::new(spec.field(), d * d + nn * nn);
    for k in &keys {
        let (g, n) = gtilde::project_quotient(spec, &GElement::single(k.clone(), one.clone()));
        let mut row = g.flatten();
        row.extend(n.flatten());
        red.insert(row);
    }
    let rank = red.rank();
    out.check(rank == d * d + nn * nn, "image is all of gl_d ⊕ gl_N", json!({ "rank": rank }));
    out.details = json!({ "degree_zero_keys": keys.len(), "positive_keys": positive.len(), "image_dim": rank });
    Ok(())
}

pub fn natural_regular(spec: &TorusSpec) -> GLdGLNModule {
    GLdGLNModule { v: repn::natural_gld(spec.field(), spec.d()), w: repn::graded_regular_gln(spec) }
}

pub fn trivial_regular(spec: &TorusSpec) -> GLdGLNModule {
    GLdGLNModule { v: repn::trivial_gld(spec.field(), spec.d()), w: repn::graded_regular_gln(spec) }
}

fn annihilation(spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let mut spans = Vec::new();
    for d in [2usize, 3] {
        let report = gtilde::commutator_span_report(d, 0)?;
        let dim = report[0].commutator_dim;
        out.check(dim == d * d - 1, "degree-0 commutator span is sl_d", json!({ "d": d, "dim": dim }));
        spans.push(json!({ "d": d, "dim": dim }));
    }
    guard_dim(spec)?;
    let positive: Vec<GKey> = gtilde::basis_up_to(spec, 3).into_iter().filter(|k| k.filtration_degree() >= 1).collect();
    for (name, vw) in [("natural⊗regular", natural_regular(spec)), ("trivial⊗regular", trivial_regular(spec))] {
        let rho = repn::pullback(spec, &vw)?;
        let deg = repn::min_annihilation_degree(&rho);
        out.check(deg == 1, "pullback is annihilated from degree 1", json!({ "module": name, "degree": deg }));
        for k in &positive {
            out.check(rho.rho_key(k).is_zero(), "positive generator acts as zero", json!({ "module": name, "key": k.to_string() }));
        }
        let comm = repn::commutant(&rho).len();
        out.check(comm == 1, "pullback is absolutely irreducible", json!({ "module": name, "commutant_dim": comm }));
    }
    out.details = json!({ "commutator_spans": spans, "positive_keys": positive.len() });
    Ok(())
}

// ---- cuspidal modules ----

/// Largest number of weight labels a box-based suite will materialize.
pub const MAX_BOX_LABELS: usize = 2500;

fn box_labels(spec: &TorusSpec, radius: i64) -> usize {
    (2 * radius as usize + 1).saturating_pow(spec.d() as u32)
}

/// Largest module dimension for commutant and interpolation work.
pub const MAX_MODULE_DIM: usize = 64;

fn guard_dim(spec: &TorusSpec) -> Result<()> {
    let n = spec.d() * spec.n() * spec.n();
    if n > MAX_MODULE_DIM {
        return Err(Error::InvalidInput(format!("test modules have dimension {n} (limit {MAX_MODULE_DIM})")));
    }
    Ok(())
}

fn guard_box(spec: &TorusSpec, radius: i64) -> Result<()> {
    let n = box_labels(spec, radius);
    if n > MAX_BOX_LABELS {
        return Err(Error::InvalidInput(format!(
            "box radius {radius} in rank {} has {n} labels (limit {MAX_BOX_LABELS})",
            spec.d()
        )));
    }
    Ok(())
}

fn zero_alpha(spec: &TorusSpec) -> Vec<CycloNum> {
    vec![CycloNum::zero(spec.field()); spec.d()]
}

/// `(1/3, 1/5, 1/7, ...)`
pub fn generic_alpha(spec: &TorusSpec) -> Vec<CycloNum> {
    const PRIMES: [i64; 8] = [3, 5, 7, 11, 13, 17, 19, 23];
    (0..spec.d()).map(|i| CycloNum::from_ratio(spec.field(), 1, PRIMES[i % PRIMES.len()] * (1 + i as i64 / 8))).collect()
}

fn functor_modules(spec: &TorusSpec, radius: i64) -> Result<Vec<(&'static str, CuspidalModule)>> {
    guard_box(spec, radius)?;
    let mut out = Vec::new();
    for (name, vw) in [("natural⊗regular", natural_regular(spec)), ("trivial⊗regular", trivial_regular(spec))] {
        out.push((name, build_module(spec, zero_alpha(spec), repn::pullback(spec, &vw)?, radius)?));
    }
    out.push(("jet(2)", build_module(spec, generic_alpha(spec), repn::jet_module(spec, 2)?, radius)?));
    Ok(out)
}

fn module_axioms(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let modules = functor_modules(spec, config.box_radius)?;
    let reports: Vec<Result<cuspidal::AxiomReport>> = modules
        .par_iter()
        .enumerate()
        .map(|(i, (_, m))| cuspidal::verify_module_axioms(m, config.symbol_box, config.samples, config.seed.wrapping_add(i as u64)))
        .collect();
    let mut details = Vec::new();
    for ((name, _), r) in modules.iter().zip(reports) {
        let r = r?;
        out.cases += r.pairs_checked * r.labels_checked;
        if let Some(msg) = &r.failure {
            out.fail("module axioms", json!({ "module": name, "message": msg, "box_radius": config.box_radius }));
        }
        details.push(json!({ "module": name, "pairs": r.pairs_checked, "labels": r.labels_checked }));
    }
    out.details = Value::Array(details);
    Ok(())
}

fn operator_relations(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let radius = config.box_radius.min(2);
    for (i, (name, m)) in functor_modules(spec, radius)?.iter().enumerate() {
        let r = cuspidal::check_operator_relations(m, config.samples.min(30), config.seed.wrapping_add(i as u64))?;
        out.cases += r.pairs_checked;
        if let Some(msg) = r.failure {
            out.fail("D/L commutation relations", json!({ "module": name, "message": msg }));
        }
    }
    Ok(())
}

fn tensor_compare(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let r = config.box_radius;
    guard_box(spec, r)?;
    for (name, vw) in [("natural⊗regular", natural_regular(spec)), ("trivial⊗regular", trivial_regular(spec))] {
        for (aname, alpha) in [("zero", zero_alpha(spec)), ("generic", generic_alpha(spec))] {
            let a = build_module(spec, alpha.clone(), repn::pullback(spec, &vw)?, r)?;
            let b = tensor_field_module(spec, alpha, vw.clone(), r)?;
            out.check(
                cuspidal::modules_equal_on_box(&a, &b, r)?,
                "functor image equals the tensor-field module",
                json!({ "module": name, "alpha": aname, "box_radius": r }),
            );
        }
    }
    Ok(())
}

fn same_action(a: &GRepresentation, b: &GRepresentation) -> bool {
    let keys: BTreeSet<&GKey> = a.nonzero().chain(b.nonzero()).map(|(k, _)| k).collect();
    a.space == b.space && keys.into_iter().all(|k| a.get(k) == b.get(k))
}

fn roundtrip(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    guard_dim(spec)?;
    guard_box(spec, config.degree_bound as i64)?;
    let modules = vec![
        ("natural⊗regular", zero_alpha(spec), repn::pullback(spec, &natural_regular(spec))?),
        ("natural⊗regular", generic_alpha(spec), repn::pullback(spec, &natural_regular(spec))?),
        ("jet(2)", generic_alpha(spec), repn::jet_module(spec, 2)?),
        ("jet(3)", zero_alpha(spec), repn::jet_module(spec, 3)?),
    ];
    let results: Vec<Result<(bool, bool)>> = modules
        .par_iter()
        .map(|(_, alpha, rho)| {
            let m = build_module(spec, alpha.clone(), rho.clone(), 1)?;
            let fam = OperatorFamily::from_module(&m, config.degree_bound);
            let coeffs = cuspidal::extract_coefficients(&fam, spec, alpha)?;
            let back = cuspidal::coefficients_to_representation(&coeffs, spec)?;
            // f(u, 0) must be (u|α + s) on each class block
            let mut consts = true;
            for u in 0..spec.d() {
                let c = coeffs.f.get(&(u, ExpVec::zero(spec.d()))).cloned();
                let c = c.unwrap_or_else(|| ExactMatrix::zeros(spec.field(), rho.dim(), rho.dim()));
                for (ci, w) in rho.space.classes().iter().enumerate() {
                    let off = rho.space.offset(ci);
                    let n = rho.space.dims()[ci];
                    let want = ExactMatrix::scalar(spec.field(), n, &(&alpha[u] + &CycloNum::from_int(spec.field(), w[u])));
                    consts &= c.submatrix(off, off, n, n) == want;
                }
            }
            Ok((same_action(&back, rho), consts))
        })
        .collect();
    for ((name, alpha, _), r) in modules.iter().zip(results) {
        let (same, consts) = r?;
        let ce = json!({ "module": name, "alpha": alpha, "degree_bound": config.degree_bound });
        out.check(same, "extracted coefficients reproduce ρ", ce.clone());
        out.check(consts, "f(u,0) = (u|α+s) Id", ce);
    }
    Ok(())
}

fn decompose(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    guard_dim(spec)?;
    let rho = repn::pullback(spec, &natural_regular(spec))?;
    let (scrambled, _) = repn::scramble(&rho, config.seed)?;
    let comm = repn::commutant(&scrambled).len();
    out.check(comm == 1, "scrambled module has commutant dimension 1", json!({ "commutant_dim": comm, "seed": config.seed }));
    let dec = repn::decompose_tensor(spec, &scrambled, None)?;
    let dims = (dec.module.v.dim(), dec.module.w.dim());
    let want = (spec.d(), spec.n() * spec.n());
    out.check(dims == want, "factor dimensions", json!({ "dims": dims, "expected": want, "seed": config.seed }));
    let rebuilt = repn::pullback(spec, &dec.module)?;
    let phi = &dec.isomorphism;
    let keys: BTreeSet<&GKey> = scrambled.nonzero().chain(rebuilt.nonzero()).map(|(k, _)| k).collect();
    let intertwines = keys.into_iter().all(|k| scrambled.rho_key(k).mul(phi) == phi.mul(&rebuilt.rho_key(k)));
    let invertible = phi.is_square() && phi.rank() == phi.rows();
    out.check(intertwines && invertible, "exact intertwining isomorphism", json!({ "seed": config.seed }));
    out.details = json!({ "dim": scrambled.dim(), "factors": dims, "commutant_dim": comm });
    Ok(())
}

fn cuspidality(config: &RunConfig, spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    let r = config.cusp_radius;
    guard_box(spec, r)?;
    let mut details = Vec::new();
    for (name, vw) in [("natural⊗regular", natural_regular(spec)), ("trivial⊗regular", trivial_regular(spec))] {
        let max_w = spec.gamma0().iter().map(|w| vw.w.grading.iter().filter(|g| *g == w).count()).max().unwrap_or(0);
        let expected = vw.v.dim() * max_w;
        for m in [
            build_module(spec, zero_alpha(spec), repn::pullback(spec, &vw)?, r)?,
            tensor_field_module(spec, generic_alpha(spec), vw.clone(), r)?,
        ] {
            let mult = cuspidal::weight_multiplicities(&m, r);
            out.check(
                mult.uniform() == Some(expected),
                "uniform weight multiplicity dim V · max dim W_s",
                json!({ "module": name, "radius": r, "uniform": mult.uniform(), "expected": expected }),
            );
        }
        details.push(json!({ "module": name, "multiplicity": expected }));
    }
    out.details = Value::Array(details);
    Ok(())
}

fn irreducibility(spec: &TorusSpec, out: &mut Outcome) -> Result<()> {
    // smaller boxes leave no room for the t^m ∂ with m ∈ R \ {0}
    let radius = (0..spec.d()).map(|i| spec.period(i)).max().unwrap_or(1);
    if box_labels(spec, radius) > 100 {
        return Err(Error::InvalidInput(format!("irreducibility box of radius {radius} is too large in rank {}", spec.d())));
    }
    let m = tensor_field_module(spec, generic_alpha(spec), natural_regular(spec), radius)?;
    let r = cuspidal::box_irreducibility(&m, radius)?;
    out.check(r.holds(), "box-scale irreducibility of F^α(V, W)", json!({ "report": r, "radius": radius }));
    out.details = json!(r);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flipped_convention_reports_counterexample() {
        let config = RunConfig { flip_sigma: true, ..RunConfig::default() };
        let r = run_suite(&config, Suite::Xmatrix, &preset("e1").unwrap().to_file());
        assert!(!r.passed);
        assert_eq!(r.failures[0].counterexample["m"], json!([0, 1]));
        assert_eq!(r.failures[0].counterexample["n"], json!([1, 0]));
    }

    #[test]
    fn small_run_is_deterministic() {
        let config = RunConfig {
            suites: vec![Suite::Brackets, Suite::Quotient, Suite::Decompose],
            samples: 10,
            hom_samples: 10,
            ..RunConfig::default()
        };
        let a = reports_json(&run_all(&config).unwrap());
        let b = reports_json(&run_all(&config).unwrap());
        assert_eq!(a, b);
        for r in run_all(&config).unwrap() {
            assert!(r.passed, "{}", serde_json::to_string(&r).unwrap());
        }
    }

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
