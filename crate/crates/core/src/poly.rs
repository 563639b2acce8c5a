//! Pseudo-Boolean polynomials.
//!
//! Variables are {0,1}-valued, so every monomial is a set of variables
//! (`x·x = x`). Coefficients are arbitrary-precision signed integers. The
//! representation is canonical: a sorted map from monomial to nonzero
//! coefficient, so two polynomials are equal exactly when their maps are.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::netlist::GateFn;

/// Default ceiling on the number of monomials an operation may produce.
pub const DEFAULT_TERM_LIMIT: usize = 10_000_000;

/// A Boolean variable, usually an AIG node id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial exceeded the term limit ({terms} > {limit})")]
    TermLimit { terms: usize, limit: usize },
    #[error("cannot substitute {0} by an expression that contains it")]
    SelfReference(Var),
    #[error("assignment does not cover variable {0}")]
    MissingVar(Var),
    #[error("{func:?} expects {expected} operand(s), got {got}")]
    Arity { func: GateFn, expected: usize, got: usize },
}

/// A product of distinct variables, kept sorted by id. The empty product is
/// the constant monomial `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[Var; 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var) -> Self {
        let mut s = SmallVec::new();
        s.push(v);
        Monomial(s)
    }

    pub fn from_vars<I: IntoIterator<Item = Var>>(vars: I) -> Self {
        let mut s: SmallVec<[Var; 4]> = vars.into_iter().collect();
        s.sort_unstable();
        s.dedup();
        Monomial(s)
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// This monomial with `v` removed.
    pub fn without(&self, v: Var) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&x| x != v).collect())
    }

    /// Product of two monomials (sorted merge, idempotent).
    pub fn product(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders coefficients by magnitude, negative before positive on ties.
pub fn coef_order(a: &BigInt, b: &BigInt) -> std::cmp::Ordering {
    a.abs().cmp(&b.abs()).then_with(|| a.cmp(b))
}

/// Reduces `c` modulo `2^bits` into the symmetric range `(-2^(bits-1), 2^(bits-1)]`.
pub fn reduce_symmetric(c: &BigInt, bits: u32) -> BigInt {
    let modulus = BigInt::one() << bits;
    let mut r = c.mod_floor(&modulus);
    if bits > 0 && r > (&modulus >> 1u32) {
        r -= &modulus;
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant<C: Into<BigInt>>(c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c.into());
        p
    }

    pub fn var(v: Var) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), BigInt::one());
        p
    }

    /// `1 - v`
    pub fn not_var(v: Var) -> Self {
        Self::constant(1) - Self::var(v)
    }

    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c.into());
        }
        p
    }

    /// Adds `c·m`, dropping the term if the coefficient cancels.
    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&BigInt> {
        self.terms.get(m)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars().iter().copied()).collect()
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.contains(v))
    }

    pub fn scale(&self, k: &BigInt) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    /// Product with a ceiling on the number of monomials in the result.
    pub fn mul_bounded(&self, other: &Polynomial, limit: usize) -> Result<Polynomial, PolyError> {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.product(mb), ca * cb);
            }
            if out.len() > limit {
                return Err(PolyError::TermLimit { terms: out.len(), limit });
            }
        }
        Ok(out)
    }

    /// Replaces every occurrence of `v` by `expr` and simplifies.
    pub fn substitute(&self, v: Var, expr: &Polynomial) -> Result<Polynomial, PolyError> {
        self.substitute_bounded(v, expr, DEFAULT_TERM_LIMIT)
    }

    pub fn substitute_bounded(
        &self,
        v: Var,
        expr: &Polynomial,
        limit: usize,
    ) -> Result<Polynomial, PolyError> {
        if expr.contains_var(v) {
            return Err(PolyError::SelfReference(v));
        }
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            if !m.contains(v) {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            let rest = m.without(v);
            for (em, ec) in &expr.terms {
                out.add_term(rest.product(em), c * ec);
            }
            if out.len() > limit {
                return Err(PolyError::TermLimit { terms: out.len(), limit });
            }
        }
        Ok(out)
    }

    /// Integer value under a 0/1 assignment.
    pub fn evaluate<F>(&self, assignment: F) -> Result<BigInt, PolyError>
    where
        F: Fn(Var) -> Option<bool>,
    {
        let mut total = BigInt::zero();
        'terms: for (m, c) in &self.terms {
            for &v in m.vars() {
                match assignment(v) {
                    Some(true) => {}
                    Some(false) => continue 'terms,
                    None => return Err(PolyError::MissingVar(v)),
                }
            }
            total += c;
        }
        Ok(total)
    }

    /// Coefficients reduced into the symmetric residue range modulo `2^bits`.
    pub fn reduce_mod_pow2(&self, bits: u32) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), reduce_symmetric(c, bits))))
    }

    /// Renames variables through `f`; terms whose monomials collide are merged.
    pub fn map_vars<F: Fn(Var) -> Var>(&self, f: F) -> Polynomial {
        Polynomial::from_terms(
            self.terms.iter().map(|(m, c)| (Monomial::from_vars(m.vars().iter().map(|&v| f(v))), c.clone())),
        )
    }

    /// Terms in rendering order: by coefficient (magnitude, then sign), then
    /// by monomial.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &BigInt)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| coef_order(a.1, b.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// Canonical text form, e.g. `1*a0*b0 + 2*a0*b1 - 2*a1*b1`.
    pub fn render<F: Fn(Var) -> String>(&self, name: F) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&mag.to_string());
            for &v in m.vars() {
                out.push('*');
                out.push_str(&name(v));
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|v| v.to_string()))
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -self.clone()
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        self.mul_bounded(rhs, usize::MAX).expect("unbounded product")
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

/// Algebraic model of a logic gate over 0/1-valued operands:
/// `¬a = 1-a`, `a∧b = ab`, `a∨b = a+b-ab`, `a⊕b = a+b-2ab`; the inverted
/// gates compose these with `1-x`.
pub fn gate_model(func: GateFn, fanins: &[Polynomial]) -> Result<Polynomial, PolyError> {
    let expected = func.arity();
    if fanins.len() != expected {
        return Err(PolyError::Arity { func, expected, got: fanins.len() });
    }
    let one = Polynomial::constant(1);
    let p = match func {
        GateFn::Const0 => Polynomial::zero(),
        GateFn::Const1 => one,
        GateFn::Buf => fanins[0].clone(),
        GateFn::Not => &one - &fanins[0],
        GateFn::And => &fanins[0] * &fanins[1],
        GateFn::Or => {
            let (a, b) = (&fanins[0], &fanins[1]);
            &(a + b) - &(a * b)
        }
        GateFn::Xor => xor_model(&fanins[0], &fanins[1]),
        GateFn::Nand => &one - &(&fanins[0] * &fanins[1]),
        GateFn::Nor => {
            let (a, b) = (&fanins[0], &fanins[1]);
            &one - &(&(a + b) - &(a * b))
        }
        GateFn::Xnor => &one - &xor_model(&fanins[0], &fanins[1]),
    };
    Ok(p)
}

fn xor_model(a: &Polynomial, b: &Polynomial) -> Polynomial {
    let ab = a * b;
    &(a + b) - &ab.scale(&BigInt::from(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Polynomial {
        Polynomial::var(Var(i))
    }

    fn c(k: i64) -> BigInt {
        BigInt::from(k)
    }

    fn names(v: Var) -> String {
        ["", "a", "b", "a0", "a1", "b0", "b1", "C"][v.0 as usize].to_string()
    }

    #[test]
    fn cancellation_and_identity() {
        let p = &(&v(1) + &v(2)) + &(-v(2));
        assert_eq!(p, v(1));
        assert_eq!(&v(1) + &Polynomial::zero(), v(1));
    }

    #[test]
    fn half_adder_sum_with_unexpanded_carry() {
        // 2C + (a + b - 2ab), C still a variable
        let sum = gate_model(GateFn::Xor, &[v(1), v(2)]).unwrap();
        let p = &v(7).scale(&c(2)) + &sum;
        assert_eq!(p.render(names), "1*a + 1*b - 2*a*b + 2*C");
        let reduced = p.substitute(Var(7), &(&v(1) * &v(2))).unwrap();
        assert_eq!(reduced, &v(1) + &v(2));
    }

    #[test]
    fn xor_is_idempotent_as_polynomial() {
        let x = gate_model(GateFn::Xor, &[v(1), v(2)]).unwrap();
        assert_eq!(&x * &x, x);
        assert_eq!(&v(1) * &v(1), v(1));
    }

    #[test]
    fn two_bit_product_expansion() {
        let a = &v(3) + &v(4).scale(&c(2));
        let b = &v(5) + &v(6).scale(&c(2));
        let f = &a * &b;
        assert_eq!(f.render(names), "1*a0*b0 + 2*a0*b1 + 2*a1*b0 + 4*a1*b1");
        let all_ones = f.evaluate(|_| Some(true)).unwrap();
        assert_eq!(all_ones, c(9));
    }

    #[test]
    fn gate_models() {
        assert_eq!(gate_model(GateFn::Xor, &[v(1), v(2)]).unwrap().render(names), "1*a + 1*b - 2*a*b");
        assert_eq!(gate_model(GateFn::Not, &[v(1)]).unwrap().render(names), "-1*a + 1");
        let nand = gate_model(GateFn::Nand, &[v(1), v(2)]).unwrap();
        assert_eq!(nand.render(names), "-1*a*b + 1");
        for bits in 0..4u32 {
            let (a, b) = (bits & 1 == 1, bits & 2 == 2);
            let got = nand.evaluate(|x| Some(if x == Var(1) { a } else { b })).unwrap();
            assert_eq!(got, c(!(a && b) as i64));
        }
        assert!(matches!(
            gate_model(GateFn::And, &[v(1)]),
            Err(PolyError::Arity { expected: 2, got: 1, .. })
        ));
    }

    #[test]
    fn substitution_edge_cases() {
        let p = &v(1) + &v(2);
        assert_eq!(p.substitute(Var(9), &v(3)).unwrap(), p);
        assert_eq!(p.substitute(Var(1), &(&v(1) + &v(3))), Err(PolyError::SelfReference(Var(1))));
        // f0 + 2 f1 with f0 := a xor b, f1 := ab  ->  a + b
        let sig = &v(3) + &v(4).scale(&c(2));
        let step = sig.substitute(Var(4), &(&v(1) * &v(2))).unwrap();
        let done = step.substitute(Var(3), &gate_model(GateFn::Xor, &[v(1), v(2)]).unwrap()).unwrap();
        assert_eq!(done, &v(1) + &v(2));
    }

    #[test]
    fn evaluation() {
        assert_eq!(Polynomial::zero().evaluate(|_| None).unwrap(), c(0));
        assert_eq!(v(1).evaluate(|_| None), Err(PolyError::MissingVar(Var(1))));
    }

    #[test]
    fn symmetric_reduction() {
        assert_eq!(reduce_symmetric(&c(-2), 4), c(-2));
        assert_eq!(reduce_symmetric(&c(14), 4), c(-2));
        assert_eq!(reduce_symmetric(&c(8), 4), c(8));
        assert_eq!(reduce_symmetric(&c(16), 4), c(0));
    }

    #[test]
    fn term_limit() {
        let a = &(&v(1) + &v(2)) + &v(3);
        let b = &(&v(4) + &v(5)) + &v(6);
        assert!(matches!(a.mul_bounded(&b, 4), Err(PolyError::TermLimit { .. })));
        assert_eq!(a.mul_bounded(&b, 9).unwrap().len(), 9);
    }
}
