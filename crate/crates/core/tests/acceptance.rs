//! Acceptance gate: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

mod props;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use proptest::test_runner::{Config, TestRunner};

use spectral_verify::aig::Aig;
use spectral_verify::exec::Exec;
use spectral_verify::genbench::{generate, inject_bugs, Family, Region};
use spectral_verify::netlist::blif::parse_blif;
use spectral_verify::netlist::spec::{parse_spec, ResolvedSpec};
use spectral_verify::poly::{Monomial, Polynomial, Var};
use spectral_verify::pipeline::{
    abstract_circuit, cross_check, spectral_sig_in, verify, verify_batch, Binding, PathKind, Status, VerifyOptions,
};
use spectral_verify::rewrite::{output_signature, rewrite_to_pis, small_cone_polynomial, RewriteOptions};
use spectral_verify::spectrum::{compute_spectrum, expand_spec, mult_spectrum_formula, FunctionClass, Spectrum};

const MULT2: &str = include_str!("data/mult2.blif");

// Pinned thresholds.
const C1_MAX_SPEC_WIDTH: usize = 32;
const C1_CIRCUIT_WIDTHS: std::ops::RangeInclusive<usize> = 2..=12;
const C1_TIME_LIMIT: Duration = Duration::from_secs(10);
const C3_MAX_WIDTH: usize = 8;
const C4_WIDTHS: [usize; 2] = [3, 4];
const C6_WIDTH: usize = 8;
const C6_BUGS: u64 = 100;
const C6_MIN_SPECTRAL_RATIO: f64 = 0.90;
const C6_TERM_LIMIT: usize = 50_000;
const C6_TIME_BUDGET: Duration = Duration::from_secs(30);
const C7_WIDTH: usize = 8;
const C7_TIME_LIMIT: Duration = Duration::from_secs(60);
const C8_WIDTH: usize = 64;
const C8_CSA_LIMIT: Duration = Duration::from_secs(120);
const C8_BOOTH_LIMIT: Duration = Duration::from_secs(60);
const C8_RUNS: usize = 3;
const C9_CASES: u32 = 1000;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn family_case(f: Family, n: usize) -> (Aig, ResolvedSpec) {
    let g = generate(f, n);
    let spec = parse_spec(f.spec()).unwrap().resolve(&g.netlist).unwrap();
    (Aig::from_netlist(&g.netlist), spec)
}

fn mult2() -> (Aig, ResolvedSpec) {
    let n = parse_blif(MULT2).unwrap();
    let spec = parse_spec("word A = a0 a1; word B = b0 b1; word F = n9 n14 n18 n16; F = A*B")
        .unwrap()
        .resolve(&n)
        .unwrap();
    (Aig::from_netlist(&n), spec)
}

fn pairs(s: &Spectrum) -> Vec<(usize, i64)> {
    s.flattened().iter().map(|e| (e.count, e.coefficient.to_i64().unwrap())).collect()
}

fn pow2s(count: usize) -> Vec<BigInt> {
    (0..count).map(|i| BigInt::from(1) << i).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let expr = parse_spec("F = A*B").unwrap().expr;
    for n in 1..=C1_MAX_SPEC_WIDTH {
        let widths = BTreeMap::from([("A".to_string(), n), ("B".to_string(), n)]);
        let s = compute_spectrum(&expand_spec(&expr, &widths, usize::MAX).unwrap());
        let want = mult_spectrum_formula(n).unwrap();
        check(s.sizes() == vec![2], format!("n={n}: spec spectrum has sizes {:?}", s.sizes()))?;
        check(s.counts(2) == want, format!("n={n}: spec counts {:?} vs formula {want:?}", s.counts(2)))?;
        check(s.coefficients(2) == pow2s(2 * n - 1), format!("n={n}: coefficients are not 2^0..2^{}", 2 * n - 2))?;
    }
    for f in [Family::CsaMult, Family::BoothRadix4Mult] {
        for n in C1_CIRCUIT_WIDTHS {
            let (g, spec) = family_case(f, n);
            let v = verify(&g, &spec, &VerifyOptions::default()).unwrap();
            check(v.path == PathKind::Spectral, format!("{f} n={n}: took the {:?} path", v.path))?;
            let s = v.spectrum.ok_or(format!("{f} n={n}: no spectrum"))?;
            let want = mult_spectrum_formula(n).unwrap();
            check(s.counts(2) == want && s.sizes() == vec![2], format!("{f} n={n}: spectrum {s}"))?;
        }
    }
    let t = start.elapsed();
    check(t < C1_TIME_LIMIT, format!("took {t:?}"))?;
    Ok(format!("spec n=1..{C1_MAX_SPEC_WIDTH}, CSA and Booth n=2..12 match the formula in {:.2} s", t.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    // Example 1: P = 3p3 + 4p2 + 4p4 + 6p1.
    let p = Polynomial::from_terms([(3, 3i64), (2, 4), (4, 4), (1, 6)].map(|(v, c)| (Monomial::var(Var(v)), BigInt::from(c))));
    let s = compute_spectrum(&p);
    check(pairs(&s) == vec![(1, 3), (2, 4), (1, 6)], format!("example 1 spectrum {s}"))?;

    // 2-bit multiplier: spectrum, frontier weights and Sig_in.
    let (g, spec) = mult2();
    let v = verify(&g, &spec, &VerifyOptions::default()).unwrap();
    check(v.status == Status::Verified, format!("2-bit multiplier: {:?}", v.status))?;
    let s = v.spectrum.clone().unwrap();
    check(pairs(&s) == vec![(1, 1), (2, 2), (1, 4)], format!("2-bit spectrum {s}"))?;
    check(s.counts(2) == vec![1, 2, 1], "2-bit N")?;
    let binding = Binding::new(&g, &spec).unwrap();
    let res = spectral_sig_in(&g, &binding.outputs, RewriteOptions::default(), Exec::Sequential, true, None)
        .map_err(|_| "2-bit spectral path failed".to_string())?;
    let frontier: BTreeMap<String, i64> =
        res.weights.frontier.iter().map(|(&n, w)| (g.var_name(n), w.to_i64().unwrap())).collect();
    let want: BTreeMap<String, i64> = [("n9", 1), ("n10", 2), ("n11", 2), ("n15", 4)].map(|(k, w)| (k.to_string(), w)).into();
    check(frontier == want, format!("frontier weights {frontier:?}"))?;
    let mut c: Vec<i64> = frontier.values().copied().collect();
    c.sort();
    check(c == vec![1, 2, 2, 4], "frontier C")?;
    let sig = v.sig_in.unwrap().render(|x| g.var_name(x.0));
    check(sig == "1*a0*b0 + 2*a0*b1 + 2*a1*b0 + 4*a1*b1", format!("example 4 Sig_in {sig}"))?;

    // 4-bit multiplier.
    let (g4, spec4) = family_case(Family::CsaMult, 4);
    let v4 = verify(&g4, &spec4, &VerifyOptions::default()).unwrap();
    let n4 = v4.spectrum.unwrap().counts(2);
    check(n4 == vec![1, 2, 3, 4, 3, 2, 1], format!("4-bit N {n4:?}"))?;

    // Example 5: 3-bit radix-4 Booth.
    let (gb, specb) = family_case(Family::BoothRadix4Mult, 3);
    let vb = verify(&gb, &specb, &VerifyOptions::default()).unwrap();
    check(vb.status == Status::Verified, format!("3-bit Booth: {:?}", vb.status))?;
    let sig_b = vb.sig_in.unwrap();
    check(sig_b.len() == 9 && sig_b.terms().all(|(m, _)| m.degree() == 2), "Booth Sig_in is not nine 2-variable terms")?;
    let rendered = sig_b.render(|x| gb.var_name(x.0));
    let want_b = "1*a0*b0 + 2*a0*b1 + 2*a1*b0 + 4*a0*b2 + 4*a1*b1 + 4*a2*b0 + 8*a1*b2 + 8*a2*b1 + 16*a2*b2";
    check(rendered == want_b, format!("Booth Sig_in {rendered}"))?;
    let bb = Binding::new(&gb, &specb).unwrap();
    let rb = spectral_sig_in(&gb, &bb.outputs, RewriteOptions::default(), Exec::Sequential, true, None)
        .map_err(|_| "Booth spectral path failed".to_string())?;
    let cubic = rb
        .weights
        .frontier
        .keys()
        .filter_map(|&n| small_cone_polynomial(&gb, n))
        .any(|p| p.terms().any(|(m, _)| m.degree() >= 3));
    check(cubic, "no Booth partial product carries a 3-variable term")?;
    Ok("examples 1, 3, 4, 5 and the 2-/4-bit spectra reproduced".into())
}

fn criterion_3() -> Outcome {
    let mut runs = 0;
    let mut patterns = 0u64;
    for f in Family::ALL {
        for n in 1..=C3_MAX_WIDTH {
            let (g, spec) = family_case(f, n);
            let r = cross_check(&g, &spec, &VerifyOptions::default()).unwrap();
            let bits = g.num_pis();
            let want_patterns = if bits <= 20 { 1u64 << bits } else { 1 << 20 };
            check(r.simulation.patterns == want_patterns, format!("{f} n={n}: {} patterns", r.simulation.patterns))?;
            check(
                r.agree,
                format!(
                    "{f} n={n}: spectral=full {:?}, spectral=spec {:?}, full=spec {:?}, mismatches {}, errors {:?} {:?}",
                    r.spectral_equals_full,
                    r.spectral_equals_spec,
                    r.full_equals_spec,
                    r.simulation.mismatches,
                    r.spectral_error,
                    r.full_error
                ),
            )?;
            runs += 1;
            patterns += r.simulation.patterns;
        }
    }
    Ok(format!("{runs} circuits agree on all three signatures and {patterns} simulated patterns"))
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for n in C4_WIDTHS {
        let mut finals = Vec::new();
        let mut middles = Vec::new();
        for f in [Family::CsaMult, Family::BoothRadix4Mult] {
            let (g, spec) = family_case(f, n);
            let v = verify(&g, &spec, &VerifyOptions::default()).unwrap();
            check(v.status == Status::Verified, format!("{f} n={n}: {:?}", v.status))?;
            let opts = RewriteOptions { trace: true, ..Default::default() };
            let (p, trace) = rewrite_to_pis(&g, &output_signature(g.pos()), opts).unwrap();
            let sig = p.render(|x| g.var_name(x.0));
            check(v.sig_in.unwrap().render(|x| g.var_name(x.0)) == sig, format!("{f} n={n}: spectral and full Sig_in differ"))?;
            let spectra: Vec<String> = trace.entries.iter().map(|e| e.spectrum.to_string()).collect();
            finals.push((sig, spectra.last().cloned().unwrap()));
            middles.push(spectra[1..spectra.len() - 1].iter().cloned().collect::<BTreeSet<_>>());
        }
        check(finals[0] == finals[1], format!("n={n}: final spectra or Sig_in differ"))?;
        let only_csa = middles[0].difference(&middles[1]).count();
        let only_booth = middles[1].difference(&middles[0]).count();
        check(only_csa + only_booth > 0, format!("n={n}: no intermediate spectrum differs"))?;
        notes.push(format!("n={n}: {only_csa}+{only_booth} distinct intermediate spectra"));
    }
    Ok(format!("CSA and Booth share Sig_in and final spectrum; {}", notes.join(", ")))
}

fn criterion_5() -> Outcome {
    let (a0, a1, b0, b1) = (Var(0), Var(1), Var(2), Var(3));
    let lin = |x: Var, y: Var| Polynomial::from_terms([(Monomial::var(x), BigInt::from(1)), (Monomial::var(y), BigInt::from(2))]);
    let p1 = &lin(a0, a1) * &lin(b0, b1);
    let p2 = &lin(a1, a0) * &lin(b0, b1);
    check(p1 != p2, "P1 == P2")?;
    let (s1, s2) = (compute_spectrum(&p1), compute_spectrum(&p2));
    check(s1 == s2, format!("{s1} vs {s2}"))?;
    check(pairs(&s1) == vec![(1, 1), (2, 2), (1, 4)], format!("spectrum {s1}"))?;
    Ok(format!("P1 != P2, both {s1}"))
}

fn criterion_6() -> Outcome {
    let families = [Family::CsaMult, Family::ArrayMult, Family::BoothRadix4Mult];
    let mut jobs = Vec::new();
    for seed in 0..C6_BUGS {
        let f = families[seed as usize % families.len()];
        let g = generate(f, C6_WIDTH);
        let (bad, _) = inject_bugs(&g.netlist, &g.adder_region, Region::Adders, 1, seed).unwrap();
        let spec = parse_spec(f.spec()).unwrap().resolve(&bad).unwrap();
        jobs.push((Aig::from_netlist(&bad), spec));
    }
    let opts = VerifyOptions { term_limit: C6_TERM_LIMIT, time_budget: Some(C6_TIME_BUDGET), ..Default::default() };
    let verdicts = verify_batch(&jobs, &opts, Exec::Parallel);
    let mut verified = 0;
    let mut early = 0;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for v in verdicts {
        let v = v.unwrap();
        if v.status == Status::Verified {
            verified += 1;
        }
        if matches!(v.spectral_status, Status::UnstructuredAdderTree | Status::SpectrumMismatch) {
            early += 1;
        } else {
            check(v.status == Status::SignatureMismatch, format!("late catch ended as {:?}", v.status))?;
        }
        *counts.entry(format!("{:?}", v.status)).or_default() += 1;
    }
    let ratio = early as f64 / C6_BUGS as f64;
    check(verified == 0, format!("{verified} buggy circuits verified"))?;
    check(ratio >= C6_MIN_SPECTRAL_RATIO, format!("spectral path caught {early}/{C6_BUGS}"))?;
    Ok(format!("{C6_BUGS}/{C6_BUGS} non-Verified, {early} caught by the spectral path, final {counts:?}"))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    for f in [Family::Mac, Family::MultPlusDistrib, Family::Mult3] {
        let (g, _) = family_case(f, C7_WIDTH);
        let start = Instant::now();
        let r = abstract_circuit(&g, &VerifyOptions::default());
        let t = start.elapsed();
        let class = r.classification.map(|c| c.class).unwrap_or(FunctionClass::Unknown);
        let ok = match (f, &class) {
            (Family::Mac, FunctionClass::FusedMultiplyAdd { .. }) => true,
            (Family::MultPlusDistrib, FunctionClass::Composite { description, .. }) => description == "2×mult",
            (Family::Mult3, FunctionClass::Multiplier3 { .. }) => true,
            _ => false,
        };
        check(ok, format!("{f}: classified as {class:?}"))?;
        check(t < C7_TIME_LIMIT, format!("{f}: took {t:?}"))?;
        notes.push(format!("{f} -> {} ({:.2} s)", class.describe(), t.as_secs_f64()));
    }
    Ok(notes.join("; "))
}

fn best_verify_time(f: Family) -> Result<Duration, String> {
    let (g, spec) = family_case(f, C8_WIDTH);
    let mut best = Duration::MAX;
    for _ in 0..C8_RUNS {
        let start = Instant::now();
        let v = verify(&g, &spec, &VerifyOptions::default()).unwrap();
        let t = start.elapsed();
        check(v.status == Status::Verified, format!("{f}: {:?}", v.status))?;
        best = best.min(t);
    }
    Ok(best)
}

fn criterion_8() -> Outcome {
    let csa = best_verify_time(Family::CsaMult)?;
    let booth = best_verify_time(Family::BoothRadix4Mult)?;
    check(csa < C8_CSA_LIMIT, format!("64-bit CSA took {csa:?}"))?;
    check(booth < C8_BOOTH_LIMIT, format!("64-bit Booth took {booth:?}"))?;
    check(booth < csa, format!("Booth {booth:?} not faster than CSA {csa:?}"))?;
    Ok(format!("64-bit CSA {:.1} ms, Booth {:.1} ms", csa.as_secs_f64() * 1e3, booth.as_secs_f64() * 1e3))
}

fn run_suite<S, F>(name: &str, strategy: S, test: F) -> Result<(), String>
where
    S: proptest::strategy::Strategy,
    F: Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
{
    let mut runner = TestRunner::new(Config { cases: C9_CASES, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn criterion_9() -> Outcome {
    use proptest::prelude::any;
    use props::*;
    run_suite("ring laws", (poly(), poly(), poly()), ring_laws)?;
    run_suite("substitution", substitution_case(), substitution_semantics)?;
    run_suite("adder relation", circuit(), adder_relation)?;
    run_suite("weight conservation", (circuit(), any::<bool>()), weight_conservation)?;
    run_suite("step invariance", random_circuit(), step_invariance)?;
    Ok(format!("5 suites x {C9_CASES} cases"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("spectrum formula", criterion_1),
        ("worked examples", criterion_2),
        ("oracle equivalence", criterion_3),
        ("implementation independence", criterion_4),
        ("non-canonical spectrum", criterion_5),
        ("bug detection", criterion_6),
        ("abstraction", criterion_7),
        ("64-bit performance", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {} PASS [{name}] {msg} ({secs:.1} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} FAIL [{name}] {msg} ({secs:.1} s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
