//! Property definitions shared by the property suite and the acceptance gate.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use spectral_verify::aig::{exhaustive_patterns, Aig, AigEdge};
use spectral_verify::atree::{detect_adders, enumerate_cuts, propagate_weights, signature_weights};
use spectral_verify::exec::Exec;
use spectral_verify::genbench::{generate, Family};
use spectral_verify::netlist::GateFn;
use spectral_verify::poly::{gate_model, reduce_symmetric, Monomial, Polynomial, Var};
use spectral_verify::rewrite::{output_signature, RewriteOptions, Rewriter};

pub const CASES: u32 = 1000;
pub const VARS: u32 = 6;

// ---------------------------------------------------------------------------
// Polynomials

pub fn poly() -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::btree_set(0..VARS, 0..4), -20i64..=20);
    prop::collection::vec(term, 0..8).prop_map(|ts| {
        Polynomial::from_terms(ts.into_iter().map(|(vs, c)| (Monomial::from_vars(vs.into_iter().map(Var)), BigInt::from(c))))
    })
}

/// Value by brute force over the bits of `x`, with no use of the
/// polynomial arithmetic under test.
fn value(p: &Polynomial, x: u32) -> BigInt {
    p.evaluate(|v| Some((x >> v.0) & 1 == 1)).expect("all variables assigned")
}

#[allow(clippy::eq_op)]
pub fn ring_laws((a, b, c): (Polynomial, Polynomial, Polynomial)) -> Result<(), TestCaseError> {
    let zero = Polynomial::zero();
    let one = Polynomial::constant(1);
    prop_assert_eq!(&(&a + &b), &(&b + &a));
    prop_assert_eq!(&(&(&a + &b) + &c), &(&a + &(&b + &c)));
    prop_assert_eq!(&(&a * &b), &(&b * &a));
    prop_assert_eq!(&(&(&a * &b) * &c), &(&a * &(&b * &c)));
    prop_assert_eq!(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)));
    prop_assert_eq!(&(&a + &zero), &a);
    prop_assert_eq!(&(&a * &one), &a);
    prop_assert!((&a - &a).is_zero());
    prop_assert!((&a * &zero).is_zero());
    for x in 0..1u32 << VARS {
        prop_assert_eq!(value(&(&a * &b), x), value(&a, x) * value(&b, x));
        prop_assert_eq!(value(&(&a + &b), x), value(&a, x) + value(&b, x));
    }
    // Idempotence on every variable.
    for v in 0..VARS {
        let x = Polynomial::var(Var(v));
        prop_assert_eq!(&(&x * &x), &x);
    }
    Ok(())
}

pub fn gate_fn() -> impl Strategy<Value = GateFn> {
    prop::sample::select(vec![
        GateFn::And,
        GateFn::Or,
        GateFn::Xor,
        GateFn::Nand,
        GateFn::Nor,
        GateFn::Xnor,
        GateFn::Not,
        GateFn::Buf,
    ])
}

pub fn substitution_case() -> impl Strategy<Value = (Polynomial, u32, GateFn, u32, u32)> {
    (poly(), 0..VARS, gate_fn(), 0..VARS, 0..VARS)
        .prop_filter("gate inputs differ from the replaced variable", |(_, v, _, x, y)| x != v && y != v)
}

/// `p[v := g(x, y)]` evaluates like `p` with `v` set to the gate's output.
pub fn substitution_semantics(
    (p, v, f, x, y): (Polynomial, u32, GateFn, u32, u32),
) -> Result<(), TestCaseError> {
    let ins: Vec<Polynomial> = [x, y].iter().take(f.arity()).map(|&i| Polynomial::var(Var(i))).collect();
    let model = gate_model(f, &ins).unwrap();
    let q = p.substitute(Var(v), &model).unwrap();
    prop_assert!(!q.contains_var(Var(v)));
    for bits in 0..1u32 << VARS {
        let a = (bits >> x) & 1;
        let b = (bits >> y) & 1;
        let out = (f.eval(a as u64 * u64::MAX, b as u64 * u64::MAX) & 1) as u32;
        let patched = (bits & !(1 << v)) | (out << v);
        prop_assert_eq!(value(&q, bits), value(&p, patched));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Circuits

#[derive(Debug, Clone)]
pub enum Op {
    Full { ins: [usize; 3], negs: u8, style: bool },
    Half { ins: [usize; 2], negs: u8 },
    Gate { f: GateFn, ins: [usize; 2], negs: u8 },
}

#[derive(Debug, Clone)]
pub enum CircuitCase {
    Random { pis: usize, ops: Vec<Op>, outputs: usize },
    Generated { family: Family, n: usize },
}

fn op() -> impl Strategy<Value = Op> {
    let idx = || 0usize..64;
    prop_oneof![
        3 => ([idx(), idx(), idx()], any::<u8>(), any::<bool>()).prop_map(|(ins, negs, style)| Op::Full { ins, negs, style }),
        2 => ([idx(), idx()], any::<u8>()).prop_map(|(ins, negs)| Op::Half { ins, negs }),
        2 => (prop::sample::select(vec![GateFn::And, GateFn::Or, GateFn::Xor]), [idx(), idx()], any::<u8>())
            .prop_map(|(f, ins, negs)| Op::Gate { f, ins, negs }),
    ]
}

/// Random 6-input circuits rich in adders, mixed with small generated
/// arithmetic circuits.
pub fn circuit() -> impl Strategy<Value = CircuitCase> {
    prop_oneof![
        3 => (prop::collection::vec(op(), 1..14), 1usize..6)
            .prop_map(|(ops, outputs)| CircuitCase::Random { pis: VARS as usize, ops, outputs }),
        1 => (prop::sample::select(Family::ALL.to_vec()), 1usize..4)
            .prop_map(|(family, n)| CircuitCase::Generated { family, n }),
    ]
}

/// Random 6-input circuits only.
pub fn random_circuit() -> impl Strategy<Value = CircuitCase> {
    (prop::collection::vec(op(), 1..14), 1usize..6)
        .prop_map(|(ops, outputs)| CircuitCase::Random { pis: VARS as usize, ops, outputs })
}

fn lit(sigs: &[AigEdge], i: usize, neg: bool) -> AigEdge {
    let e = sigs[i % sigs.len()];
    if neg {
        !e
    } else {
        e
    }
}

pub fn build(case: &CircuitCase) -> Aig {
    match case {
        CircuitCase::Generated { family, n } => Aig::from_netlist(&generate(*family, *n).netlist),
        CircuitCase::Random { pis, ops, outputs } => {
            let mut g = Aig::new();
            let mut sigs: Vec<AigEdge> = (0..*pis).map(|i| g.add_pi(&format!("x{i}"))).collect();
            for op in ops {
                match *op {
                    Op::Full { ins, negs, style } => {
                        let [a, b, c] = [0, 1, 2].map(|k| lit(&sigs, ins[k], negs >> k & 1 == 1));
                        let ab = g.xor(a, b);
                        let s = g.xor(ab, c);
                        let carry = if style {
                            let t0 = g.and(a, b);
                            let t1 = g.and(ab, c);
                            g.or(t0, t1)
                        } else {
                            let t0 = g.and(a, b);
                            let t1 = g.and(a, c);
                            let t2 = g.and(b, c);
                            let t = g.or(t0, t1);
                            g.or(t, t2)
                        };
                        sigs.push(s);
                        sigs.push(carry);
                    }
                    Op::Half { ins, negs } => {
                        let [a, b] = [0, 1].map(|k| lit(&sigs, ins[k], negs >> k & 1 == 1));
                        let s = g.xor(a, b);
                        let c = g.and(a, b);
                        sigs.push(s);
                        sigs.push(c);
                    }
                    Op::Gate { f, ins, negs } => {
                        let [a, b] = [0, 1].map(|k| lit(&sigs, ins[k], negs >> k & 1 == 1));
                        let o = g.gate(f, &[a, b]);
                        sigs.push(if negs >> 2 & 1 == 1 { !o } else { o });
                    }
                }
            }
            let k = (*outputs).min(sigs.len());
            for (i, &e) in sigs[sigs.len() - k..].iter().enumerate() {
                g.add_po(e, &format!("z{i}"));
            }
            g
        }
    }
}

/// Node values for every input pattern, one vector of words per node.
fn all_node_values(g: &Aig) -> (usize, Vec<Vec<u64>>) {
    let k = g.num_pis();
    let pats = exhaustive_patterns(k);
    let words = pats.first().map_or(1, Vec::len);
    let cols = (0..words)
        .map(|w| g.simulate_nodes(&pats.iter().map(|p| p[w]).collect::<Vec<_>>()))
        .collect();
    (1usize << k, cols)
}

fn sig_out_value(g: &Aig, values: &[u64], bit: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for (i, &e) in g.pos().iter().enumerate() {
        if (Aig::edge_value(values, e) >> bit) & 1 == 1 {
            acc += BigInt::one() << i;
        }
    }
    acc
}

fn lanes(total: usize, w: usize) -> u32 {
    (total - 64 * w).min(64) as u32
}

/// Every detected adder satisfies `l0 + l1 + l2 = 2·carry + sum` on every
/// input pattern.
pub fn adder_relation(case: CircuitCase) -> Result<(), TestCaseError> {
    let g = build(&case);
    let adders = detect_adders(&g, &enumerate_cuts(&g, Exec::Sequential));
    let (total, cols) = all_node_values(&g);
    for a in &adders {
        for (w, vals) in cols.iter().enumerate() {
            for bit in 0..lanes(total, w) {
                let (ins, s, c) = a.observe(vals, bit);
                prop_assert_eq!(ins, 2 * c + s, "adder {:?} at pattern {}", a, 64 * w + bit as usize);
            }
        }
    }
    Ok(())
}

/// The weighted frontier always evaluates to the output word.
pub fn weight_conservation((case, modular): (CircuitCase, bool)) -> Result<(), TestCaseError> {
    let g = build(&case);
    let adders = detect_adders(&g, &enumerate_cuts(&g, Exec::Sequential));
    let m = modular.then_some(g.pos().len() as u32);
    let Ok(wm) = propagate_weights(&g, &adders, &signature_weights(g.pos()), m) else {
        return Ok(());
    };
    let (total, cols) = all_node_values(&g);
    for (w, vals) in cols.iter().enumerate() {
        for bit in 0..lanes(total, w) {
            let lhs = wm.value(vals, bit);
            let rhs = sig_out_value(&g, vals, bit);
            match wm.modulus_bits {
                Some(b) => prop_assert_eq!(reduce_symmetric(&lhs, b), reduce_symmetric(&rhs, b)),
                None => prop_assert_eq!(lhs, rhs),
            }
        }
    }
    Ok(())
}

/// After every elimination the working polynomial still evaluates to the
/// output word on every input pattern.
pub fn step_invariance(case: CircuitCase) -> Result<(), TestCaseError> {
    let g = build(&case);
    let (total, cols) = all_node_values(&g);
    let vals = &cols[0];
    let mut rw = Rewriter::new(&g, &output_signature(g.pos()), RewriteOptions::default());
    loop {
        let p = rw.current();
        for bit in 0..lanes(total, 0) {
            let got = p.evaluate(|v| Some((vals[v.0 as usize] >> bit) & 1 == 1)).unwrap();
            prop_assert_eq!(got, sig_out_value(&g, vals, bit));
        }
        if rw.step().unwrap().is_none() {
            break;
        }
    }
    prop_assert!(rw.current().vars().iter().all(|v| g.is_pi(v.0)));
    Ok(())
}
