//! Parametric arithmetic benchmark generators.

mod mutate;

pub use mutate::{inject_bugs, GenError, Mutation, MutationKind, Region};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::netlist::{GateFn, Netlist, WordBinding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    CsaMult,
    ArrayMult,
    BoothRadix4Mult,
    RippleAdder,
    Mac,
    Mult3,
    MultPlusDistrib,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::CsaMult,
        Family::ArrayMult,
        Family::BoothRadix4Mult,
        Family::RippleAdder,
        Family::Mac,
        Family::Mult3,
        Family::MultPlusDistrib,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::CsaMult => "csa_mult",
            Family::ArrayMult => "array_mult",
            Family::BoothRadix4Mult => "booth_radix4_mult",
            Family::RippleAdder => "ripple_adder",
            Family::Mac => "mac",
            Family::Mult3 => "mult3",
            Family::MultPlusDistrib => "mult_plus_distrib",
        }
    }

    /// Word-level function of the family.
    pub fn spec(self) -> &'static str {
        match self {
            Family::CsaMult | Family::ArrayMult | Family::BoothRadix4Mult => "F = A*B",
            Family::RippleAdder => "F = A+B",
            Family::Mac => "F = A*B+C",
            Family::Mult3 => "F = A*B*C",
            Family::MultPlusDistrib => "F = A*(B+C)",
        }
    }

    pub fn operands(self) -> &'static [&'static str] {
        match self {
            Family::Mac | Family::Mult3 | Family::MultPlusDistrib => &["A", "B", "C"],
            _ => &["A", "B"],
        }
    }

    pub fn output_width(self, n: usize) -> usize {
        match self {
            Family::RippleAdder => n + 1,
            Family::Mult3 => 3 * n,
            Family::MultPlusDistrib => 2 * n + 1,
            _ => 2 * n,
        }
    }

    /// Reference integer function.
    pub fn evaluate(self, a: &BigInt, b: &BigInt, c: &BigInt) -> BigInt {
        match self {
            Family::CsaMult | Family::ArrayMult | Family::BoothRadix4Mult => a * b,
            Family::RippleAdder => a + b,
            Family::Mac => a * b + c,
            Family::Mult3 => a * b * c,
            Family::MultPlusDistrib => a * (b + c),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub width: usize,
    pub seed: u64,
    pub bugs: usize,
}

/// A generated circuit and the gates that belong to its adders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub netlist: Netlist,
    pub adder_region: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Bit {
    Const(bool),
    Sig(String),
}

const ZERO: Bit = Bit::Const(false);
const ONE: Bit = Bit::Const(true);

struct Gen {
    b: crate::netlist::NetlistBuilder,
    count: usize,
    region: BTreeSet<String>,
    adder: bool,
}

impl Gen {
    fn new(name: &str) -> Self {
        Gen { b: Netlist::builder(name), count: 0, region: BTreeSet::new(), adder: false }
    }

    fn inputs(&mut self, prefix: &str, n: usize) -> Vec<Bit> {
        (0..n)
            .map(|i| {
                let name = format!("{prefix}{i}");
                self.b.input(&name);
                Bit::Sig(name)
            })
            .collect()
    }

    fn gate(&mut self, f: GateFn, ins: &[&str]) -> Bit {
        let name = format!("g{}", self.count);
        self.count += 1;
        self.b.gate(f, &name, ins);
        if self.adder {
            self.region.insert(name.clone());
        }
        Bit::Sig(name)
    }

    fn not(&mut self, x: &Bit) -> Bit {
        match x {
            Bit::Const(v) => Bit::Const(!v),
            Bit::Sig(s) => self.gate(GateFn::Not, &[s]),
        }
    }

    fn and(&mut self, x: &Bit, y: &Bit) -> Bit {
        match (x, y) {
            (Bit::Const(false), _) | (_, Bit::Const(false)) => ZERO,
            (Bit::Const(true), o) | (o, Bit::Const(true)) => o.clone(),
            (Bit::Sig(a), Bit::Sig(b)) => self.gate(GateFn::And, &[a, b]),
        }
    }

    fn or(&mut self, x: &Bit, y: &Bit) -> Bit {
        match (x, y) {
            (Bit::Const(true), _) | (_, Bit::Const(true)) => ONE,
            (Bit::Const(false), o) | (o, Bit::Const(false)) => o.clone(),
            (Bit::Sig(a), Bit::Sig(b)) => self.gate(GateFn::Or, &[a, b]),
        }
    }

    fn xor(&mut self, x: &Bit, y: &Bit) -> Bit {
        match (x, y) {
            (Bit::Const(false), o) | (o, Bit::Const(false)) => o.clone(),
            (Bit::Const(true), o) | (o, Bit::Const(true)) => self.not(o),
            (Bit::Sig(a), Bit::Sig(b)) => self.gate(GateFn::Xor, &[a, b]),
        }
    }

    fn ha(&mut self, a: &Bit, b: &Bit) -> (Bit, Bit) {
        let prev = std::mem::replace(&mut self.adder, true);
        let r = (self.xor(a, b), self.and(a, b));
        self.adder = prev;
        r
    }

    fn fa(&mut self, a: &Bit, b: &Bit, c: &Bit) -> (Bit, Bit) {
        let prev = std::mem::replace(&mut self.adder, true);
        let s1 = self.xor(a, b);
        let s = self.xor(&s1, c);
        let ab = self.and(a, b);
        let sc = self.and(&s1, c);
        let cout = self.or(&ab, &sc);
        self.adder = prev;
        (s, cout)
    }

    /// Adds up to three bits of one column: `(sum, carry)`.
    fn add_bits(&mut self, bits: &[&Bit]) -> (Bit, Bit) {
        let mut sig: Vec<&Bit> = bits.iter().copied().filter(|b| matches!(b, Bit::Sig(_))).collect();
        let ones = bits.iter().filter(|b| matches!(b, Bit::Const(true))).count();
        sig.extend(std::iter::repeat_n(&ONE, ones));
        match sig.as_slice() {
            [] => (ZERO, ZERO),
            [x] => ((*x).clone(), ZERO),
            [x, y] => self.ha(x, y),
            [x, y, z] => self.fa(x, y, z),
            _ => unreachable!("at most three bits per column"),
        }
    }

    /// Ripple-carry sum of two words, `width` bits (the final carry is kept
    /// when it fits).
    fn ripple(&mut self, x: &[Bit], y: &[Bit], width: usize) -> Vec<Bit> {
        let mut out = Vec::with_capacity(width);
        let mut carry = ZERO;
        for k in 0..width {
            let a = x.get(k).unwrap_or(&ZERO).clone();
            let b = y.get(k).unwrap_or(&ZERO).clone();
            let (s, c) = self.add_bits(&[&a, &b, &carry]);
            out.push(s);
            carry = c;
        }
        out
    }

    /// Carry-save accumulation of `rows` (bits tagged with their weight, at
    /// most one per column in each row) followed by a ripple-carry adder.
    /// Bits of weight `width` or more are dropped.
    fn accumulate(&mut self, rows: &[Vec<(usize, Bit)>], width: usize) -> Vec<Bit> {
        let mut s = vec![ZERO; width];
        let mut c = vec![ZERO; width];
        let mut rows = rows.iter();
        if let Some(first) = rows.next() {
            for (w, bit) in first {
                if *w < width {
                    debug_assert_eq!(s[*w], ZERO);
                    s[*w] = bit.clone();
                }
            }
        }
        for row in rows {
            let mut r = vec![ZERO; width];
            for (w, bit) in row {
                if *w < width {
                    debug_assert_eq!(r[*w], ZERO);
                    r[*w] = bit.clone();
                }
            }
            let mut s2 = vec![ZERO; width];
            let mut c2 = vec![ZERO; width];
            for k in 0..width {
                // A settled column with no new bit is left as is.
                if r[k] == ZERO && c2[k] == ZERO {
                    s2[k] = s[k].clone();
                    c2[k] = c[k].clone();
                    continue;
                }
                let (sum, carry) = self.add_bits(&[&s[k], &c[k], &r[k]]);
                s2[k] = sum;
                if k + 1 < width {
                    c2[k + 1] = carry;
                }
            }
            s = s2;
            c = c2;
        }
        self.ripple(&s, &c, width)
    }

    fn outputs(&mut self, bits: &[Bit]) -> Vec<String> {
        bits.iter()
            .enumerate()
            .map(|(i, bit)| {
                let name = format!("z{i}");
                match bit {
                    Bit::Const(v) => self.b.gate(if *v { GateFn::Const1 } else { GateFn::Const0 }, &name, &[]),
                    Bit::Sig(s) => self.b.gate(GateFn::Buf, &name, &[s]),
                };
                self.b.output(&name);
                name
            })
            .collect()
    }

    fn pp_rows(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Vec<(usize, Bit)>> {
        (0..b.len())
            .map(|i| (0..a.len()).map(|j| (i + j, self.and(&a[j], &b[i]))).collect())
            .collect()
    }

    fn multiply(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let rows = self.pp_rows(a, b);
        self.accumulate(&rows, a.len() + b.len())
    }

    /// Radix-4 Booth product of unsigned words, modulo `2^(2n)`.
    fn booth(&mut self, a: &[Bit], b: &[Bit]) -> Vec<Bit> {
        let n = a.len();
        let width = 2 * n;
        let bit = |v: &[Bit], i: isize| if i < 0 { ZERO } else { v.get(i as usize).cloned().unwrap_or(ZERO) };
        let mut rows = Vec::new();
        let mut negs = Vec::new();
        let mut inv_negs = Vec::new();
        let mut constant = BigInt::zero();
        for j in 0..=n / 2 {
            let (lo, mid, hi) = (bit(b, 2 * j as isize - 1), bit(b, 2 * j as isize), bit(b, 2 * j as isize + 1));
            let one = self.xor(&mid, &lo);
            let not_hi = self.not(&hi);
            let not_mid = self.not(&mid);
            let not_lo = self.not(&lo);
            let t = self.and(&not_mid, &not_lo);
            let up = self.and(&hi, &t);
            let t = self.and(&mid, &lo);
            let down = self.and(&not_hi, &t);
            let two = self.or(&up, &down);
            let neg = hi;
            let mut row = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let x = self.and(&one, &bit(a, i as isize));
                let y = self.and(&two, &bit(a, i as isize - 1));
                let sel = self.or(&x, &y);
                let pp = self.xor(&sel, &neg);
                row.push((2 * j + i, pp));
            }
            rows.push(row);
            negs.push((2 * j, neg.clone()));
            inv_negs.push((n + 1 + 2 * j, self.not(&neg)));
            constant -= BigInt::one() << (n + 1 + 2 * j);
        }
        let modulus = BigInt::one() << width;
        let constant = ((constant % &modulus) + &modulus) % &modulus;
        let const_row: Vec<(usize, Bit)> =
            (0..width).filter(|&k| constant.bit(k as u64)).map(|k| (k, ONE)).collect();
        rows.push(negs);
        rows.push(inv_negs);
        rows.push(const_row);
        self.accumulate(&rows, width)
    }

    fn finish(mut self, words: &[(&str, &[Bit])], outputs: &[Bit]) -> Generated {
        let names = self.outputs(outputs);
        for (w, bits) in words {
            let bits = bits
                .iter()
                .map(|b| match b {
                    Bit::Sig(s) => s.clone(),
                    Bit::Const(_) => unreachable!("operand bits are inputs"),
                })
                .collect();
            self.b.word(WordBinding::new(*w, bits));
        }
        self.b.word(WordBinding::new("F", names));
        let netlist = self.b.build().expect("generated netlist is well formed");
        Generated { netlist, adder_region: self.region }
    }
}

/// Generates `family` with `n`-bit operands (`n >= 1`).
pub fn generate(family: Family, n: usize) -> Generated {
    assert!(n >= 1, "operand width must be at least 1");
    let mut g = Gen::new(&format!("{}_{n}", family.name()));
    let a = g.inputs("a", n);
    let b = g.inputs("b", n);
    let c = if family.operands().len() == 3 { g.inputs("c", n) } else { Vec::new() };
    let width = family.output_width(n);
    let out = match family {
        Family::CsaMult => g.multiply(&a, &b),
        Family::ArrayMult => {
            let rows = g.pp_rows(&a, &b);
            let mut acc: Vec<Bit> = rows[0].iter().map(|(_, x)| x.clone()).collect();
            for (i, row) in rows.iter().enumerate().skip(1) {
                let bits: Vec<Bit> = row.iter().map(|(_, x)| x.clone()).collect();
                let hi = acc.split_off(i);
                let sum = g.ripple(&hi, &bits, n + 1);
                acc.extend(sum);
            }
            acc.resize(width, ZERO);
            acc
        }
        Family::BoothRadix4Mult => g.booth(&a, &b),
        Family::RippleAdder => g.ripple(&a, &b, width),
        Family::Mac => {
            let mut rows = g.pp_rows(&a, &b);
            rows.push(c.iter().cloned().enumerate().collect());
            g.accumulate(&rows, width)
        }
        Family::Mult3 => {
            let p = g.multiply(&a, &b);
            let rows = g.pp_rows(&p, &c);
            g.accumulate(&rows, width)
        }
        Family::MultPlusDistrib => {
            let s = g.ripple(&b, &c, n + 1);
            let rows = g.pp_rows(&a, &s);
            g.accumulate(&rows, width)
        }
    };
    let words: Vec<(&str, &[Bit])> = match family.operands().len() {
        3 => vec![("A", &a), ("B", &b), ("C", &c)],
        _ => vec![("A", &a), ("B", &b)],
    };
    g.finish(&words, &out)
}

/// Operand values of one simulation lane, packed LSB first.
pub fn lane_operands(n: usize, operands: usize, pis: &[u64], lane: u32) -> Vec<BigInt> {
    (0..operands)
        .map(|w| {
            let mut v = BigInt::zero();
            for i in 0..n {
                if (pis[w * n + i] >> lane) & 1 == 1 {
                    v |= BigInt::one() << i;
                }
            }
            v
        })
        .collect()
}
