//! Algebraic spectra, spectral polynomials and function classification.
//!
//! The spectrum of a polynomial is the histogram of its coefficients,
//! partitioned by monomial size `k`. Entries within a component are ordered
//! by coefficient magnitude, negative before positive on ties.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::spec::SpecExpr;
use crate::poly::{coef_order, Monomial, PolyError, Polynomial, Var};

/// Serializes a `BigInt` as a decimal string.
pub mod bigint_string {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Serializes a `BTreeMap<u32, BigInt>` with decimal-string values.
pub mod bigint_map {
    use std::collections::BTreeMap;

    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u32, BigInt>, s: S) -> Result<S::Ok, S::Error> {
        let v: BTreeMap<u32, String> = m.iter().map(|(k, c)| (*k, c.to_string())).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, BigInt>, D::Error> {
        let v = BTreeMap::<u32, String>::deserialize(d)?;
        v.into_iter().map(|(k, c)| Ok((k, c.parse().map_err(D::Error::custom)?))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub count: usize,
    #[serde(with = "bigint_string")]
    pub coefficient: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Spectrum {
    components: BTreeMap<usize, Vec<SpectrumEntry>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectrumError {
    #[error("bit width must be at least 1")]
    ZeroWidth,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl Spectrum {
    pub fn from_terms<'a, I>(terms: I) -> Spectrum
    where
        I: IntoIterator<Item = (usize, &'a BigInt)>,
    {
        let mut hist: BTreeMap<usize, BTreeMap<OrdCoef, usize>> = BTreeMap::new();
        for (k, c) in terms {
            *hist.entry(k).or_default().entry(OrdCoef(c.clone())).or_default() += 1;
        }
        let components = hist
            .into_iter()
            .map(|(k, m)| (k, m.into_iter().map(|(c, count)| SpectrumEntry { count, coefficient: c.0 }).collect()))
            .collect();
        Spectrum { components }
    }

    pub fn of(p: &Polynomial) -> Spectrum {
        compute_spectrum(p)
    }

    pub fn component(&self, k: usize) -> &[SpectrumEntry] {
        self.components.get(&k).map_or(&[], Vec::as_slice)
    }

    pub fn components(&self) -> impl Iterator<Item = (usize, &[SpectrumEntry])> {
        self.components.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Counts of component `k`, in coefficient order.
    pub fn counts(&self, k: usize) -> Vec<usize> {
        self.component(k).iter().map(|e| e.count).collect()
    }

    pub fn coefficients(&self, k: usize) -> Vec<BigInt> {
        self.component(k).iter().map(|e| e.coefficient.clone()).collect()
    }

    /// Total number of monomials described.
    pub fn num_terms(&self) -> usize {
        self.components.values().flatten().map(|e| e.count).sum()
    }

    /// All components merged into one, as for a linear polynomial.
    pub fn flattened(&self) -> Vec<SpectrumEntry> {
        let mut m: BTreeMap<OrdCoef, usize> = BTreeMap::new();
        for e in self.components.values().flatten() {
            *m.entry(OrdCoef(e.coefficient.clone())).or_default() += e.count;
        }
        m.into_iter().map(|(c, count)| SpectrumEntry { count, coefficient: c.0 }).collect()
    }

    /// CSV rows `k,coefficient,count`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,coefficient,count\n");
        for (k, entries) in &self.components {
            for e in entries {
                let _ = writeln!(s, "{k},{},{}", e.coefficient, e.count);
            }
        }
        s
    }

    /// Bar chart of component `k`: one bar per coefficient, height = count.
    pub fn to_svg(&self, k: usize) -> Option<String> {
        let entries = self.components.get(&k)?;
        let (bar, gap, height, margin) = (24.0f64, 6.0f64, 200.0f64, 40.0f64);
        let max = entries.iter().map(|e| e.count).max().unwrap_or(1) as f64;
        let width = margin * 2.0 + entries.len() as f64 * (bar + gap);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{:.0}\" font-family=\"sans-serif\" font-size=\"10\">",
            height + margin * 2.0
        );
        let _ = writeln!(s, "<text x=\"{margin}\" y=\"20\" font-size=\"14\">S{k}</text>");
        let base = height + margin;
        let _ = writeln!(s, "<line x1=\"{margin}\" y1=\"{base}\" x2=\"{:.1}\" y2=\"{base}\" stroke=\"black\"/>", width - margin);
        for (i, e) in entries.iter().enumerate() {
            let h = e.count as f64 / max * height;
            let x = margin + i as f64 * (bar + gap);
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"{bar}\" height=\"{h:.1}\" fill=\"steelblue\"><title>C={} N={}</title></rect>",
                base - h,
                e.coefficient,
                e.count
            );
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", x + bar / 2.0, base - h - 3.0, e.count);
            let label = short_coef(&e.coefficient);
            let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{label}</text>", x + bar / 2.0, base + 12.0);
        }
        s.push_str("</svg>\n");
        Some(s)
    }
}

fn short_coef(c: &BigInt) -> String {
    let mag = c.abs();
    if mag > BigInt::from(1024) && (&mag & (&mag - 1u32)) == BigInt::from(0) {
        let sign = if c.is_negative() { "-" } else { "" };
        format!("{sign}2^{}", mag.bits() - 1)
    } else {
        c.to_string()
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, entries) in &self.components {
            if !first {
                f.write_str("; ")?;
            }
            first = false;
            write!(f, "S{k} = {{")?;
            for (i, e) in entries.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "({},{})", e.count, e.coefficient)?;
            }
            f.write_str("}")?;
        }
        if first {
            f.write_str("{}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OrdCoef(BigInt);

impl Ord for OrdCoef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        coef_order(&self.0, &other.0)
    }
}

impl PartialOrd for OrdCoef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

pub fn compute_spectrum(p: &Polynomial) -> Spectrum {
    Spectrum::from_terms(p.terms().map(|(m, c)| (m.degree(), c)))
}

/// Bit-level expansion of `spec` with fresh variables for each word bit.
pub fn expand_spec(spec: &SpecExpr, widths: &BTreeMap<String, usize>, limit: usize) -> Result<Polynomial, PolyError> {
    let mut base = BTreeMap::new();
    let mut next = 0u32;
    for (w, &n) in widths {
        base.insert(w.clone(), next);
        next += n as u32;
    }
    let env = |w: &str| {
        let (Some(&b), Some(&n)) = (base.get(w), widths.get(w)) else {
            return Polynomial::zero();
        };
        Polynomial::from_terms((0..n).map(|i| (Monomial::var(Var(b + i as u32)), BigInt::one() << i)))
    };
    spec.expand(&env, limit)
}

pub fn reference_spectrum(
    spec: &SpecExpr,
    widths: &BTreeMap<String, usize>,
    limit: usize,
) -> Result<Spectrum, SpectrumError> {
    Ok(compute_spectrum(&expand_spec(spec, widths, limit)?))
}

/// Counts of the size-2 component of an `n`-bit product.
pub fn mult_spectrum_formula(n: usize) -> Result<Vec<usize>, SpectrumError> {
    if n == 0 {
        return Err(SpectrumError::ZeroWidth);
    }
    Ok((0..2 * n - 1).map(|i| if i < n { i + 1 } else { 2 * n - 1 - i }).collect())
}

/// A placeholder of a spectral polynomial: the `index`-th monomial with
/// coefficient `coefficient` in component `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placeholder {
    pub var: Var,
    pub name: String,
    pub k: usize,
    #[serde(with = "bigint_string")]
    pub coefficient: BigInt,
}

/// `Σ_i Σ_j C_i·p_i^j` over fresh variables `p1, p2, ..`.
pub fn spectral_polynomial(s: &Spectrum) -> (Polynomial, Vec<Placeholder>) {
    let mut p = Polynomial::zero();
    let mut table = Vec::new();
    for (k, entries) in s.components() {
        for e in entries {
            for _ in 0..e.count {
                let var = Var(table.len() as u32 + 1);
                p.add_term(Monomial::var(var), e.coefficient.clone());
                table.push(Placeholder { var, name: format!("p{}", var.0), k, coefficient: e.coefficient.clone() });
            }
        }
    }
    (p, table)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionClass {
    Adder { operands: usize, width: usize },
    Multiplier2 { width: usize },
    Multiplier3 { width: usize },
    FusedMultiplyAdd { width: usize, addend_width: usize },
    Composite { description: String, width: usize },
    Unknown,
}

impl FunctionClass {
    pub fn describe(&self) -> String {
        match self {
            FunctionClass::Adder { operands, width } => format!("{operands}-operand {width}-bit adder"),
            FunctionClass::Multiplier2 { width } => format!("{width}-bit multiplier (1×mult)"),
            FunctionClass::Multiplier3 { width } => format!("{width}-bit 3-operand multiplier (1×mult3)"),
            FunctionClass::FusedMultiplyAdd { width, .. } => format!("{width}-bit multiply-add (1×mult; 1×add)"),
            FunctionClass::Composite { description, width } => format!("{width}-bit composite ({description})"),
            FunctionClass::Unknown => "unknown".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub class: FunctionClass,
    /// Word-level template that reproduces the spectrum exactly.
    pub template: Option<String>,
    pub matched: Option<Spectrum>,
}

fn word(name: &str) -> SpecExpr {
    SpecExpr::Word(name.into())
}

fn mul(a: SpecExpr, b: SpecExpr) -> SpecExpr {
    SpecExpr::Mul(Box::new(a), Box::new(b))
}

fn add(a: SpecExpr, b: SpecExpr) -> SpecExpr {
    SpecExpr::Add(Box::new(a), Box::new(b))
}

fn try_template(s: &Spectrum, e: SpecExpr, widths: &[(&str, usize)]) -> Option<(String, Spectrum)> {
    let widths: BTreeMap<String, usize> = widths.iter().map(|(w, n)| (w.to_string(), *n)).collect();
    if widths.values().any(|&n| n == 0 || n > 4096) {
        return None;
    }
    let r = reference_spectrum(&e, &widths, crate::poly::DEFAULT_TERM_LIMIT).ok()?;
    (r == *s).then(|| (e.to_string(), r))
}

/// Matches `s` against word-level templates; widths are inferred from the
/// number of bins. A shape check (which components are present) comes
/// first, so a spectrum with any component besides `S2` is never a plain
/// multiplier.
pub fn classify(s: &Spectrum) -> Classification {
    let unknown = Classification { class: FunctionClass::Unknown, template: None, matched: None };
    let found = |class, (template, r): (String, Spectrum)| Classification {
        class,
        template: Some(template),
        matched: Some(r),
    };
    let sizes = s.sizes();
    let bins = |k| s.component(k).len();
    match sizes.as_slice() {
        [1] => {
            let n = bins(1);
            let m = s.component(1).first().map_or(0, |e| e.count);
            if m == 0 || m > 64 {
                return unknown;
            }
            let names: Vec<String> = (0..m).map(|i| ((b'A' + (i % 26) as u8) as char).to_string()).collect();
            let e = names.iter().skip(1).fold(word(&names[0]), |acc, w| add(acc, word(w)));
            let widths: Vec<(&str, usize)> = names.iter().map(|w| (w.as_str(), n)).collect();
            match try_template(s, e, &widths) {
                Some(t) => found(FunctionClass::Adder { operands: m, width: n }, t),
                None => unknown,
            }
        }
        [2] => {
            let b = bins(2);
            if b % 2 == 0 {
                return unknown;
            }
            let n = b.div_ceil(2);
            if let Some(t) = try_template(s, mul(word("A"), word("B")), &[("A", n), ("B", n)]) {
                return found(FunctionClass::Multiplier2 { width: n }, t);
            }
            let e = add(mul(word("A"), word("B")), mul(word("A"), word("C")));
            if let Some(t) = try_template(s, e, &[("A", n), ("B", n), ("C", n)]) {
                return found(FunctionClass::Composite { description: "2×mult".into(), width: n }, t);
            }
            unknown
        }
        [1, 2] => {
            let b = bins(2);
            if b % 2 == 0 {
                return unknown;
            }
            let n = b.div_ceil(2);
            let c = bins(1);
            let e = add(mul(word("A"), word("B")), word("C"));
            match try_template(s, e, &[("A", n), ("B", n), ("C", c)]) {
                Some(t) => found(FunctionClass::FusedMultiplyAdd { width: n, addend_width: c }, t),
                None => unknown,
            }
        }
        [3] => {
            let b = bins(3);
            if (b + 2) % 3 != 0 {
                return unknown;
            }
            let n = b.div_ceil(3);
            let e = mul(mul(word("A"), word("B")), word("C"));
            match try_template(s, e, &[("A", n), ("B", n), ("C", n)]) {
                Some(t) => found(FunctionClass::Multiplier3 { width: n }, t),
                None => unknown,
            }
        }
        _ => unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn entries(s: &Spectrum, k: usize) -> Vec<(usize, i64)> {
        s.component(k).iter().map(|e| (e.count, e.coefficient.to_i64().unwrap())).collect()
    }

    #[test]
    fn linear_example() {
        let p = Polynomial::from_terms([
            (Monomial::var(Var(3)), 3),
            (Monomial::var(Var(2)), 4),
            (Monomial::var(Var(4)), 4),
            (Monomial::var(Var(1)), 6),
        ]);
        let s = compute_spectrum(&p);
        assert_eq!(s.sizes(), vec![1]);
        assert_eq!(entries(&s, 1), vec![(1, 3), (2, 4), (1, 6)]);
    }

    #[test]
    fn two_bit_product() {
        let w: BTreeMap<String, usize> = [("A".to_string(), 2), ("B".to_string(), 2)].into();
        let s = reference_spectrum(&mul(word("A"), word("B")), &w, 1000).unwrap();
        assert_eq!(entries(&s, 2), vec![(1, 1), (2, 2), (1, 4)]);
        assert!(compute_spectrum(&Polynomial::zero()).is_empty());
    }

    #[test]
    fn formula() {
        assert_eq!(mult_spectrum_formula(4).unwrap(), vec![1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(mult_spectrum_formula(2).unwrap(), vec![1, 2, 1]);
        assert_eq!(mult_spectrum_formula(1).unwrap(), vec![1]);
        assert_eq!(mult_spectrum_formula(0), Err(SpectrumError::ZeroWidth));
    }

    #[test]
    fn spectral_polynomials() {
        let w: BTreeMap<String, usize> = [("A".to_string(), 2), ("B".to_string(), 2)].into();
        let s = reference_spectrum(&mul(word("A"), word("B")), &w, 1000).unwrap();
        let (sp, table) = spectral_polynomial(&s);
        assert_eq!(sp.render(|v| format!("p{}", v.0)), "1*p1 + 2*p2 + 2*p3 + 4*p4");
        assert_eq!(table.len(), 4);
        assert!(spectral_polynomial(&Spectrum::default()).0.is_zero());

        let adder = reference_spectrum(&add(word("A"), word("B")), &w, 1000).unwrap();
        let (sp, _) = spectral_polynomial(&adder);
        assert_eq!(sp.render(|v| format!("p{}", v.0)), "1*p1 + 1*p2 + 2*p3 + 2*p4");
        assert_eq!(compute_spectrum(&sp), adder);
    }

    #[test]
    fn classification() {
        let w = |pairs: &[(&str, usize)]| pairs.iter().map(|(a, b)| (a.to_string(), *b)).collect::<BTreeMap<_, _>>();
        let m4 = reference_spectrum(&mul(word("A"), word("B")), &w(&[("A", 4), ("B", 4)]), 1000).unwrap();
        assert_eq!(classify(&m4).class, FunctionClass::Multiplier2 { width: 4 });
        let a4 = reference_spectrum(&add(word("A"), word("B")), &w(&[("A", 4), ("B", 4)]), 1000).unwrap();
        assert_eq!(classify(&a4).class, FunctionClass::Adder { operands: 2, width: 4 });
        let mac = reference_spectrum(&add(word("A"), mul(word("B"), word("C"))), &w(&[("A", 3), ("B", 3), ("C", 3)]), 1000)
            .unwrap();
        assert_eq!(classify(&mac).class, FunctionClass::FusedMultiplyAdd { width: 3, addend_width: 3 });
        let odd = Spectrum::from_terms([(2, &BigInt::from(3))]);
        assert_eq!(classify(&odd).class, FunctionClass::Unknown);
    }

    #[test]
    fn csv_and_svg() {
        let s = Spectrum::from_terms([(1, &BigInt::from(1)), (1, &BigInt::from(1)), (1, &BigInt::from(2))]);
        assert_eq!(s.to_csv(), "k,coefficient,count\n1,1,2\n1,2,1\n");
        assert!(s.to_svg(1).unwrap().contains("<rect"));
        assert!(s.to_svg(2).is_none());
    }
}
