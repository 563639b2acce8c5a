//! End-to-end flows: verification against a word-level specification,
//! word-level abstraction, and a three-way cross check.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{Aig, AigEdge};
use crate::atree::{
    detect_adders, enumerate_cuts, propagate_weights, signature_weights, AdderInstance, AdderKind, WeightError,
    WeightMap,
};
use crate::exec::Exec;
use crate::netlist::spec::ResolvedSpec;
use crate::poly::{Monomial, Polynomial, Var, DEFAULT_TERM_LIMIT};
use crate::rewrite::{
    output_signature, rewrite_frontier, rewrite_to_pis, RewriteError, RewriteOptions, RewriteTrace, TraceEntry,
    DEFAULT_MEMORY_LIMIT,
};
use crate::spectrum::{classify, compute_spectrum, Classification, Spectrum};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub term_limit: usize,
    /// Approximate byte ceiling for rewriting.
    pub memory_limit: usize,
    pub time_budget: Option<Duration>,
    pub exec: Exec,
    pub trace: bool,
    /// Fall back to full rewriting when extraction fails.
    pub fallback: bool,
    /// Allow dropping carries whose weight vanishes modulo the output width.
    pub modular: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            term_limit: DEFAULT_TERM_LIMIT,
            memory_limit: DEFAULT_MEMORY_LIMIT,
            time_budget: Some(Duration::from_secs(600)),
            exec: Exec::default(),
            trace: false,
            fallback: true,
            modular: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("word {word}: bit {bit} is not a primary {expected} of the circuit")]
    Binding { word: String, bit: String, expected: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Verified,
    SpectrumMismatch,
    SignatureMismatch,
    UnstructuredAdderTree,
    Blowup,
}

impl Status {
    /// 0 verified, 1 refuted, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Verified => 0,
            Status::SpectrumMismatch | Status::SignatureMismatch => 1,
            Status::UnstructuredAdderTree | Status::Blowup => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Spectral,
    FullRewrite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    /// Operand values as hex strings.
    pub inputs: BTreeMap<String, String>,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AdderCounts {
    pub fa: usize,
    pub ha: usize,
}

impl AdderCounts {
    /// Counts adders, leaving out plain XORs whose carry is internal.
    fn of(adders: &[AdderInstance]) -> Self {
        let real = adders.iter().filter(|a| !a.carry_internal);
        let fa = real.clone().filter(|a| a.kind == AdderKind::Fa).count();
        AdderCounts { fa, ha: real.count() - fa }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub schema: u32,
    pub status: Status,
    pub path: PathKind,
    /// Outcome of the spectral path alone, before any fallback.
    pub spectral_status: Status,
    pub detail: Option<String>,
    pub conflict_node: Option<String>,
    pub mismatched_terms: Vec<String>,
    pub counterexample: Option<Counterexample>,
    pub adders: AdderCounts,
    pub frontier_size: usize,
    pub modulus_bits: Option<u32>,
    pub spectrum: Option<Spectrum>,
    pub expected_spectrum: Option<Spectrum>,
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(skip)]
    pub sig_in: Option<Polynomial>,
    #[serde(skip)]
    pub trace: Option<RewriteTrace>,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

struct Timer {
    start: Instant,
    phase: Instant,
    timings: BTreeMap<String, f64>,
}

impl Timer {
    fn new() -> Self {
        let now = Instant::now();
        Timer { start: now, phase: now, timings: BTreeMap::new() }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        *self.timings.entry(name.into()).or_insert(0.0) += (now - self.phase).as_secs_f64() * 1e3;
        self.phase = now;
    }

    fn finish(mut self) -> BTreeMap<String, f64> {
        self.timings.insert("total".into(), self.start.elapsed().as_secs_f64() * 1e3);
        self.timings
    }
}

/// Output edges and input variables of a resolved specification.
#[derive(Debug, Clone)]
pub struct Binding {
    pub outputs: Vec<AigEdge>,
    pub inputs: Vec<(String, Vec<u32>)>,
}

impl Binding {
    pub fn new(g: &Aig, spec: &ResolvedSpec) -> Result<Binding, PipelineError> {
        let outputs = spec
            .output
            .bits
            .iter()
            .map(|b| {
                g.po_by_name(b).ok_or_else(|| PipelineError::Binding {
                    word: spec.output.name.clone(),
                    bit: b.clone(),
                    expected: "output",
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let inputs = spec
            .inputs
            .iter()
            .map(|w| {
                let ids = w
                    .bits
                    .iter()
                    .map(|b| {
                        g.pi_by_name(b).ok_or_else(|| PipelineError::Binding {
                            word: w.name.clone(),
                            bit: b.clone(),
                            expected: "input",
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((w.name.clone(), ids))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Binding { outputs, inputs })
    }

    fn word_values(&self, assignment: &dyn Fn(u32) -> bool) -> BTreeMap<String, BigInt> {
        self.inputs
            .iter()
            .map(|(name, ids)| {
                let mut v = BigInt::zero();
                for (i, &id) in ids.iter().enumerate() {
                    if assignment(id) {
                        v |= BigInt::one() << i;
                    }
                }
                (name.clone(), v)
            })
            .collect()
    }
}

/// Result of the spectral path up to `Sig_in`.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub adders: Vec<AdderInstance>,
    pub weights: WeightMap,
    pub sig_in: Polynomial,
    /// Whether `sig_in` was read off the frontier without rewriting.
    pub direct: bool,
}

#[derive(Debug, Clone)]
pub enum SpectralFailure {
    Uat { adders: Vec<AdderInstance>, error: WeightError },
    Rewrite { adders: Vec<AdderInstance>, weights: WeightMap, error: RewriteError },
}

/// Positive AND-tree support of `id` over inputs, if it is one.
fn and_tree_support(g: &Aig, id: u32, out: &mut Vec<u32>) -> bool {
    if g.is_pi(id) {
        out.push(id);
        return true;
    }
    if !g.is_and(id) || out.len() > 64 {
        return false;
    }
    let n = *g.node(id);
    !n.fanin0.is_complemented()
        && !n.fanin1.is_complemented()
        && and_tree_support(g, n.fanin0.id(), out)
        && and_tree_support(g, n.fanin1.id(), out)
}

/// `offset + Σ w·monomial` when every frontier node is an input or a
/// positive AND of inputs.
pub fn direct_frontier(g: &Aig, weights: &WeightMap) -> Option<Polynomial> {
    let mut p = Polynomial::constant(weights.offset.clone());
    for (&v, w) in &weights.frontier {
        let mut support = Vec::new();
        if !and_tree_support(g, v, &mut support) {
            return None;
        }
        p.add_term(Monomial::from_vars(support.into_iter().map(Var)), w.clone());
    }
    Some(match weights.modulus_bits {
        Some(b) => p.reduce_mod_pow2(b),
        None => p,
    })
}

/// Adder-tree extraction, weight propagation and local rewriting.
pub fn spectral_sig_in(
    g: &Aig,
    outputs: &[AigEdge],
    rw: RewriteOptions,
    exec: Exec,
    modular: bool,
    timer: Option<&mut dyn FnMut(&str)>,
) -> Result<SpectralResult, SpectralFailure> {
    let mut noop = |_: &str| {};
    let lap: &mut dyn FnMut(&str) = match timer {
        Some(t) => t,
        None => &mut noop,
    };
    let cuts = enumerate_cuts(g, exec);
    lap("cuts");
    let adders = detect_adders(g, &cuts);
    lap("detect");
    let m = modular.then_some(outputs.len() as u32);
    let weights = match propagate_weights(g, &adders, &signature_weights(outputs), m) {
        Ok(w) => w,
        Err(error) => {
            lap("weights");
            return Err(SpectralFailure::Uat { adders, error });
        }
    };
    lap("weights");
    if let Some(sig_in) = direct_frontier(g, &weights) {
        lap("rewrite");
        return Ok(SpectralResult { adders, weights, sig_in, direct: true });
    }
    let rw = RewriteOptions { modulus_bits: weights.modulus_bits, ..rw };
    let r = rewrite_frontier(g, &weights.frontier, &weights.offset, rw);
    lap("rewrite");
    match r {
        Ok(sig_in) => Ok(SpectralResult { adders, weights, sig_in, direct: false }),
        Err(error) => Err(SpectralFailure::Rewrite { adders, weights, error }),
    }
}

fn reduce(p: &Polynomial, bits: Option<u32>) -> Polynomial {
    match bits {
        Some(b) => p.reduce_mod_pow2(b),
        None => p.clone(),
    }
}

fn deadline(opts: &VerifyOptions) -> Option<Instant> {
    opts.time_budget.map(|d| Instant::now() + d)
}

fn rewrite_options(opts: &VerifyOptions, deadline: Option<Instant>) -> RewriteOptions {
    RewriteOptions { term_limit: opts.term_limit, memory_limit: opts.memory_limit, deadline, modulus_bits: None, trace: opts.trace }
}

fn render_terms(g: &Aig, diff: &Polynomial, max: usize) -> Vec<String> {
    let mut terms: Vec<(&Monomial, &BigInt)> = diff.terms().collect();
    terms.sort_by_key(|(m, _)| m.degree());
    terms
        .into_iter()
        .take(max)
        .map(|(m, c)| Polynomial::from_terms([(m.clone(), c.clone())]).render(|v| g.var_name(v.0)))
        .collect()
}

fn hex(v: &BigInt) -> String {
    format!("{v:#x}")
}

/// Circuit output word and spec value under a single assignment.
fn evaluate_once(
    g: &Aig,
    spec: &ResolvedSpec,
    binding: &Binding,
    assignment: &dyn Fn(u32) -> bool,
    modulus: Option<u32>,
) -> (BTreeMap<String, BigInt>, BigInt, BigInt) {
    let pis: Vec<u64> = g.pis().map(|id| assignment(id) as u64).collect();
    let values = g.simulate_nodes(&pis);
    let mut actual = BigInt::zero();
    for (i, &e) in binding.outputs.iter().enumerate() {
        if Aig::edge_value(&values, e) & 1 == 1 {
            actual |= BigInt::one() << i;
        }
    }
    let words = binding.word_values(assignment);
    let mut expected = spec.evaluate(&|w| words.get(w).cloned().unwrap_or_default());
    if let Some(b) = modulus {
        expected = ((expected % (BigInt::one() << b)) + (BigInt::one() << b)) % (BigInt::one() << b);
    }
    (words, expected, actual)
}

/// An input assignment on which the circuit and the specification differ.
/// The support of a lowest-degree monomial of `diff` is tried first, then
/// random assignments.
pub fn find_counterexample(
    g: &Aig,
    spec: &ResolvedSpec,
    binding: &Binding,
    diff: &Polynomial,
    modulus: Option<u32>,
    seed: u64,
) -> Option<Counterexample> {
    let report = |words: BTreeMap<String, BigInt>, expected: BigInt, actual: BigInt| Counterexample {
        inputs: words.iter().map(|(k, v)| (k.clone(), hex(v))).collect(),
        expected: hex(&expected),
        actual: hex(&actual),
    };
    if let Some((m, _)) = diff.terms().min_by_key(|(m, _)| m.degree()) {
        let ones: Vec<u32> = m.vars().iter().map(|v| v.0).collect();
        let (w, e, a) = evaluate_once(g, spec, binding, &|id| ones.contains(&id), modulus);
        if e != a {
            return Some(report(w, e, a));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4096 {
        let bits: HashMap<u32, bool> = g.pis().map(|id| (id, rng.gen())).collect();
        let (w, e, a) = evaluate_once(g, spec, binding, &|id| bits[&id], modulus);
        if e != a {
            return Some(report(w, e, a));
        }
    }
    None
}

fn trace_entry(step: usize, eliminated: Option<u32>, p: &Polynomial) -> TraceEntry {
    TraceEntry { step, eliminated, terms: p.len(), spectrum: compute_spectrum(p) }
}

/// Verifies that the outputs of `g` compute `spec`.
pub fn verify(g: &Aig, spec: &ResolvedSpec, opts: &VerifyOptions) -> Result<Verdict, PipelineError> {
    let binding = Binding::new(g, spec)?;
    let deadline = deadline(opts);
    let mut timer = Timer::new();
    let width = binding.outputs.len() as u32;
    // A specification wider than its output word is compared modulo 2^m.
    let truncated = (spec.max_value() >> width as usize) > BigInt::zero();
    let compare_bits = truncated.then_some(width);

    let mut v = Verdict {
        schema: SCHEMA,
        status: Status::Blowup,
        path: PathKind::Spectral,
        spectral_status: Status::Blowup,
        detail: None,
        conflict_node: None,
        mismatched_terms: Vec::new(),
        counterexample: None,
        adders: AdderCounts::default(),
        frontier_size: 0,
        modulus_bits: compare_bits,
        spectrum: None,
        expected_spectrum: None,
        timings_ms: BTreeMap::new(),
        sig_in: None,
        trace: None,
    };

    let spec_poly = match spec.expand(|b| Var(g.pi_by_name(b).expect("bound input")), opts.term_limit) {
        Ok(p) => p,
        Err(e) => {
            v.detail = Some(format!("specification expansion: {e}"));
            v.timings_ms = timer.finish();
            return Ok(v);
        }
    };
    timer.lap("spec");

    let rw = rewrite_options(opts, deadline);
    let spectral = {
        let mut lap = |name: &str| timer.lap(name);
        spectral_sig_in(g, &binding.outputs, rw, opts.exec, opts.modular, Some(&mut lap))
    };

    let fallback_reason = match spectral {
        Ok(res) => {
            v.adders = AdderCounts::of(&res.adders);
            v.frontier_size = res.weights.frontier.len();
            let bits = compare_bits.or(res.weights.modulus_bits);
            v.modulus_bits = bits;
            let got = reduce(&res.sig_in, bits);
            let want = reduce(&spec_poly, bits);
            let got_s = compute_spectrum(&got);
            let want_s = compute_spectrum(&want);
            if opts.trace {
                let sig_out = output_signature(&binding.outputs);
                let mut front = Polynomial::constant(res.weights.offset.clone());
                for (&n, w) in &res.weights.frontier {
                    front.add_term(Monomial::var(Var(n)), w.clone());
                }
                v.trace = Some(RewriteTrace {
                    entries: vec![
                        trace_entry(0, None, &sig_out),
                        trace_entry(1, None, &front),
                        trace_entry(2, None, &got),
                    ],
                    eliminated: Vec::new(),
                    interval: 1,
                });
            }
            let status = if got_s != want_s {
                Status::SpectrumMismatch
            } else if got != want {
                Status::SignatureMismatch
            } else {
                Status::Verified
            };
            v.status = status;
            v.spectral_status = status;
            v.spectrum = Some(got_s);
            v.expected_spectrum = Some(want_s);
            if status == Status::Verified {
                // Equal modulo 2^m with both sides in range: the exact
                // function is the specification.
                v.sig_in = Some(if bits.is_some() && compare_bits.is_none() { spec_poly.clone() } else { got });
            } else {
                let diff = &got - &want;
                v.mismatched_terms = render_terms(g, &diff, 8);
                v.counterexample = find_counterexample(g, spec, &binding, &diff, compare_bits, 1);
                v.sig_in = Some(got);
            }
            timer.lap("compare");
            None
        }
        Err(SpectralFailure::Uat { adders, error }) => {
            v.adders = AdderCounts::of(&adders);
            v.spectral_status = Status::UnstructuredAdderTree;
            v.conflict_node = Some(g.var_name(error.node()));
            Some(error.to_string())
        }
        Err(SpectralFailure::Rewrite { adders, weights, error }) => {
            v.adders = AdderCounts::of(&adders);
            v.frontier_size = weights.frontier.len();
            v.spectral_status = Status::Blowup;
            v.status = Status::Blowup;
            v.conflict_node = Some(g.var_name(error.node()));
            v.detail = Some(error.to_string());
            None
        }
    };

    if let Some(reason) = fallback_reason {
        v.detail = Some(format!("adder tree: {reason}"));
        v.status = Status::UnstructuredAdderTree;
        if opts.fallback {
            v.path = PathKind::FullRewrite;
            // The output word is below 2^m, so agreement modulo 2^m with an
            // in-range specification is exact.
            let bits = if opts.modular { Some(width) } else { compare_bits };
            v.modulus_bits = bits;
            let start = output_signature(&binding.outputs);
            let r = rewrite_to_pis(g, &start, RewriteOptions { modulus_bits: bits, ..rw });
            timer.lap("full_rewrite");
            match r {
                Ok((p, trace)) => {
                    let want = reduce(&spec_poly, bits);
                    let got_s = compute_spectrum(&p);
                    v.expected_spectrum = Some(compute_spectrum(&want));
                    v.spectrum = Some(got_s);
                    if p == want {
                        v.status = Status::Verified;
                        if bits.is_some() && compare_bits.is_none() {
                            v.sig_in = Some(spec_poly.clone());
                        }
                    } else {
                        let diff = &p - &want;
                        v.status = Status::SignatureMismatch;
                        v.mismatched_terms = render_terms(g, &diff, 8);
                        v.counterexample = find_counterexample(g, spec, &binding, &diff, compare_bits, 1);
                    }
                    v.sig_in.get_or_insert(p);
                    if opts.trace {
                        v.trace = Some(trace);
                    }
                    timer.lap("compare");
                }
                Err(e) => {
                    v.status = Status::Blowup;
                    v.detail = Some(format!("{}; full rewrite: {e}", v.detail.take().unwrap_or_default()));
                    v.conflict_node = Some(g.var_name(e.node()));
                    let (check, witness) =
                        simulate_against_spec(g, spec, &binding, FALLBACK_PATTERNS, 1, opts.exec);
                    timer.lap("simulation");
                    if let Some(cx) = witness {
                        v.status = Status::SignatureMismatch;
                        v.detail = Some(format!(
                            "{}; simulation: {} of {} patterns differ",
                            v.detail.take().unwrap_or_default(),
                            check.mismatches,
                            check.patterns
                        ));
                        v.counterexample = Some(cx);
                    }
                }
            }
        }
    }
    v.timings_ms = timer.finish();
    Ok(v)
}

/// Verifies many circuits, in parallel under [`Exec::Parallel`].
pub fn verify_batch(
    jobs: &[(Aig, ResolvedSpec)],
    opts: &VerifyOptions,
    exec: Exec,
) -> Vec<Result<Verdict, PipelineError>> {
    exec.map(jobs, |(g, s)| verify(g, s, opts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbstractionStatus {
    Ok,
    Blowup,
}

/// One placeholder of the spectral polynomial and the input monomials it
/// stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperandTerm {
    pub placeholder: String,
    pub k: usize,
    #[serde(with = "crate::spectrum::bigint_string")]
    pub coefficient: BigInt,
    pub expression: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbstractionReport {
    pub schema: u32,
    pub status: AbstractionStatus,
    pub path: PathKind,
    pub uat: Option<String>,
    pub detail: Option<String>,
    pub adders: AdderCounts,
    pub spectrum: Option<Spectrum>,
    pub classification: Option<Classification>,
    pub description: Option<String>,
    pub composition: Vec<OperandTerm>,
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(skip)]
    pub sig_in: Option<Polynomial>,
}

impl AbstractionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Placeholder table: one entry per (size, coefficient) bin, in spectrum
/// order, mapped to the input monomials of that bin.
pub fn composition(g: &Aig, sig_in: &Polynomial) -> Vec<OperandTerm> {
    let mut bins: BTreeMap<usize, Vec<(BigInt, Vec<&Monomial>)>> = BTreeMap::new();
    for (m, c) in sig_in.terms() {
        if m.is_one() {
            continue;
        }
        let row = bins.entry(m.degree()).or_default();
        match row.iter_mut().find(|(k, _)| k == c) {
            Some((_, ms)) => ms.push(m),
            None => row.push((c.clone(), vec![m])),
        }
    }
    let mut out = Vec::new();
    for (k, mut row) in bins {
        row.sort_by(|a, b| crate::poly::coef_order(&a.0, &b.0));
        for (c, ms) in row {
            let expression = ms
                .iter()
                .map(|m| m.vars().iter().map(|v| g.var_name(v.0)).collect::<Vec<_>>().join("*"))
                .collect::<Vec<_>>()
                .join(" + ");
            out.push(OperandTerm { placeholder: format!("p{}", out.len() + 1), k, coefficient: c, expression });
        }
    }
    out
}

/// Recovers a word-level description of `g` from the spectrum of its
/// output signature (all outputs, in order, LSB first).
pub fn abstract_circuit(g: &Aig, opts: &VerifyOptions) -> AbstractionReport {
    let deadline = deadline(opts);
    let mut timer = Timer::new();
    let outputs = g.pos().to_vec();
    let rw = rewrite_options(opts, deadline);
    let mut report = AbstractionReport {
        schema: SCHEMA,
        status: AbstractionStatus::Ok,
        path: PathKind::Spectral,
        uat: None,
        detail: None,
        adders: AdderCounts::default(),
        spectrum: None,
        classification: None,
        description: None,
        composition: Vec::new(),
        timings_ms: BTreeMap::new(),
        sig_in: None,
    };
    let spectral = {
        let mut lap = |name: &str| timer.lap(name);
        spectral_sig_in(g, &outputs, rw, opts.exec, opts.modular, Some(&mut lap))
    };
    let sig = match spectral {
        Ok(r) => {
            report.adders = AdderCounts::of(&r.adders);
            Ok(r.sig_in)
        }
        Err(SpectralFailure::Rewrite { adders, error, .. }) => {
            report.adders = AdderCounts::of(&adders);
            Err(error)
        }
        Err(SpectralFailure::Uat { adders, error }) => {
            report.adders = AdderCounts::of(&adders);
            report.uat = Some(error.to_string());
            report.path = PathKind::FullRewrite;
            let r = rewrite_to_pis(g, &output_signature(&outputs), RewriteOptions { trace: false, ..rw });
            timer.lap("full_rewrite");
            r.map(|(p, _)| p)
        }
    };
    match sig {
        Ok(p) => {
            let s = compute_spectrum(&p);
            let c = classify(&s);
            report.description = Some(c.class.describe());
            report.classification = Some(c);
            report.composition = composition(g, &p);
            report.spectrum = Some(s);
            report.sig_in = Some(p);
            timer.lap("classify");
        }
        Err(e) => {
            report.status = AbstractionStatus::Blowup;
            report.detail = Some(e.to_string());
        }
    }
    report.timings_ms = timer.finish();
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationCheck {
    pub patterns: u64,
    pub exhaustive: bool,
    pub mismatches: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub schema: u32,
    /// `None` when the spectral path did not produce a signature.
    pub spectral_equals_full: Option<bool>,
    pub spectral_equals_spec: Option<bool>,
    pub full_equals_spec: Option<bool>,
    pub spectral_error: Option<String>,
    pub full_error: Option<String>,
    pub simulation: SimulationCheck,
    pub witness: Option<Counterexample>,
    pub agree: bool,
}

impl CrossCheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Largest pattern count used by [`simulate_against_spec`].
pub const SIMULATION_CAP: u64 = 1 << 20;

/// Random patterns tried when full rewriting gives up.
pub const FALLBACK_PATTERNS: u64 = 1 << 16;

/// Compares circuit outputs with the spec's integer value on every input
/// pattern when there are at most 20 input bits, else on `random` seeded
/// random patterns.
pub fn simulate_against_spec(
    g: &Aig,
    spec: &ResolvedSpec,
    binding: &Binding,
    random: u64,
    seed: u64,
    exec: Exec,
) -> (SimulationCheck, Option<Counterexample>) {
    let n = g.num_pis();
    let exhaustive = n <= 20;
    let total = if exhaustive { 1u64 << n } else { random.min(SIMULATION_CAP) };
    let words = total.div_ceil(64) as usize;
    let width = binding.outputs.len();
    let truncated = (spec.max_value() >> width) > BigInt::zero();
    let modulus = BigInt::one() << width;
    let results = exec.map_range(words, |w| {
        let lanes = (total - 64 * w as u64).min(64) as u32;
        let pis: Vec<u64> = if exhaustive {
            (0..n)
                .map(|i| {
                    let mut x = 0u64;
                    for l in 0..lanes {
                        x |= (((64 * w as u64 + l as u64) >> i) & 1) << l;
                    }
                    x
                })
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (w as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (0..n).map(|_| rng.gen()).collect()
        };
        let values = g.simulate_nodes(&pis);
        let mut bad = 0u64;
        let mut first = None;
        for l in 0..lanes {
            let mut actual = BigInt::zero();
            for (i, &e) in binding.outputs.iter().enumerate() {
                if (Aig::edge_value(&values, e) >> l) & 1 == 1 {
                    actual |= BigInt::one() << i;
                }
            }
            let words = binding.word_values(&|id| (pis[id as usize - 1] >> l) & 1 == 1);
            let mut expected = spec.evaluate(&|name| words.get(name).cloned().unwrap_or_default());
            if truncated {
                expected %= &modulus;
            }
            if expected != actual {
                bad += 1;
                if first.is_none() {
                    first = Some(Counterexample {
                        inputs: words.iter().map(|(k, v)| (k.clone(), hex(v))).collect(),
                        expected: hex(&expected),
                        actual: hex(&actual),
                    });
                }
            }
        }
        (bad, first)
    });
    let mut mismatches = 0;
    let mut witness = None;
    for (bad, first) in results {
        mismatches += bad;
        if witness.is_none() {
            witness = first;
        }
    }
    (SimulationCheck { patterns: total, exhaustive, mismatches }, witness)
}

/// Spectral-path `Sig_in`, full-rewrite `Sig_in`, the expanded
/// specification and simulation must all agree.
pub fn cross_check(g: &Aig, spec: &ResolvedSpec, opts: &VerifyOptions) -> Result<CrossCheckReport, PipelineError> {
    let binding = Binding::new(g, spec)?;
    let deadline = deadline(opts);
    let rw = RewriteOptions { trace: false, ..rewrite_options(opts, deadline) };
    let width = binding.outputs.len() as u32;
    let truncated = (spec.max_value() >> width as usize) > BigInt::zero();
    let compare_bits = truncated.then_some(width);

    let spec_poly = spec.expand(|b| Var(g.pi_by_name(b).expect("bound input")), opts.term_limit).ok();
    let spectral = spectral_sig_in(g, &binding.outputs, rw, opts.exec, opts.modular, None);
    let full_bits = if opts.modular { Some(width) } else { compare_bits };
    let full = rewrite_to_pis(g, &output_signature(&binding.outputs), RewriteOptions { modulus_bits: full_bits, ..rw });

    let (spectral_sig, spectral_error) = match spectral {
        Ok(r) => (Some((r.sig_in, r.weights.modulus_bits)), None),
        Err(SpectralFailure::Uat { error, .. }) => (None, Some(error.to_string())),
        Err(SpectralFailure::Rewrite { error, .. }) => (None, Some(error.to_string())),
    };
    let (full_sig, full_error) = match full {
        Ok((p, _)) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let eq = |a: &Polynomial, b: &Polynomial, bits: Option<u32>| reduce(a, bits) == reduce(b, bits);
    let spectral_equals_full = match (&spectral_sig, &full_sig) {
        (Some((s, _)), Some(f)) => Some(eq(s, f, full_bits)),
        _ => None,
    };
    let spectral_equals_spec = match (&spectral_sig, &spec_poly) {
        (Some((s, m)), Some(p)) => Some(eq(s, p, compare_bits.or(*m))),
        _ => None,
    };
    let full_equals_spec = match (&full_sig, &spec_poly) {
        (Some(f), Some(p)) => Some(eq(f, p, full_bits)),
        _ => None,
    };
    let (simulation, mut witness) = simulate_against_spec(g, spec, &binding, SIMULATION_CAP, 7, opts.exec);
    if witness.is_none() {
        if let (Some(f), Some(p)) = (&full_sig, &spec_poly) {
            let diff = &reduce(f, full_bits) - &reduce(p, full_bits);
            if !diff.is_zero() {
                witness = find_counterexample(g, spec, &binding, &diff, compare_bits, 1);
            }
        }
    }
    let agree = spectral_equals_full == Some(true)
        && spectral_equals_spec == Some(true)
        && full_equals_spec == Some(true)
        && simulation.mismatches == 0;
    Ok(CrossCheckReport {
        schema: SCHEMA,
        spectral_equals_full,
        spectral_equals_spec,
        full_equals_spec,
        spectral_error,
        full_error,
        simulation,
        witness,
        agree,
    })
}
