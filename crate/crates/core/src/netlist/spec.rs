//! Word-level specification language.
//!
//! ```text
//! word A = a0..a3 unsigned;
//! word B = b0, b1, b2, b3 unsigned;
//! F = A*B + C;
//! ```
//!
//! Declarations are optional. Without them, input words are inferred from
//! primary input names (`a0, a1, ..` binds `A`) and an undeclared target
//! binds every primary output in order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{infer_words, Netlist, WordBinding};
use crate::poly::{Polynomial, PolyError, DEFAULT_TERM_LIMIT};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpecExpr {
    Word(String),
    Const(BigInt),
    Add(Box<SpecExpr>, Box<SpecExpr>),
    Mul(Box<SpecExpr>, Box<SpecExpr>),
}

impl SpecExpr {
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_words(&mut out);
        out
    }

    fn collect_words<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SpecExpr::Word(w) => {
                if !out.contains(&w.as_str()) {
                    out.push(w);
                }
            }
            SpecExpr::Const(_) => {}
            SpecExpr::Add(a, b) | SpecExpr::Mul(a, b) => {
                a.collect_words(out);
                b.collect_words(out);
            }
        }
    }

    pub fn evaluate(&self, env: &dyn Fn(&str) -> BigInt) -> BigInt {
        match self {
            SpecExpr::Word(w) => env(w),
            SpecExpr::Const(c) => c.clone(),
            SpecExpr::Add(a, b) => a.evaluate(env) + b.evaluate(env),
            SpecExpr::Mul(a, b) => a.evaluate(env) * b.evaluate(env),
        }
    }

    /// Bit-level expansion with each word replaced by its encoding.
    pub fn expand(
        &self,
        env: &dyn Fn(&str) -> Polynomial,
        limit: usize,
    ) -> Result<Polynomial, PolyError> {
        Ok(match self {
            SpecExpr::Word(w) => env(w),
            SpecExpr::Const(c) => Polynomial::constant(c.clone()),
            SpecExpr::Add(a, b) => a.expand(env, limit)? + b.expand(env, limit)?,
            SpecExpr::Mul(a, b) => a.expand(env, limit)?.mul_bounded(&b.expand(env, limit)?, limit)?,
        })
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            SpecExpr::Word(w) => f.write_str(w),
            SpecExpr::Const(c) => write!(f, "{c}"),
            SpecExpr::Add(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 0)?;
                f.write_str(" + ")?;
                b.fmt_prec(f, 0)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            SpecExpr::Mul(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str("*")?;
                b.fmt_prec(f, 1)
            }
        }
    }
}

impl fmt::Display for SpecExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unsupported operator `{op}`")]
    UnsupportedOperator { op: String, line: usize, column: usize },
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("bit `{0}` belongs to more than one word")]
    BitCollision(String),
    #[error("bit `{bit}` of word `{word}` is not a primary {expected}")]
    NotABoundary { word: String, bit: String, expected: &'static str },
    #[error("specification has no target assignment")]
    MissingTarget,
}

/// A parsed specification: `target = expr` plus declared words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spec {
    pub target: String,
    pub expr: SpecExpr,
    pub words: Vec<WordBinding>,
}

/// A specification bound to a circuit's inputs and outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedSpec {
    pub expr: SpecExpr,
    pub output: WordBinding,
    pub inputs: Vec<WordBinding>,
}

impl ResolvedSpec {
    pub fn widths(&self) -> BTreeMap<String, usize> {
        self.inputs.iter().map(|w| (w.name.clone(), w.width())).collect()
    }

    pub fn input(&self, name: &str) -> Option<&WordBinding> {
        self.inputs.iter().find(|w| w.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigInt),
    Sym(char),
    Range,
    Bad(String),
}

fn lex(text: &str) -> Vec<(Tok, usize, usize)> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split("//").next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '[' || chars[i] == ']') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), ln + 1, col));
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Num(s.parse().expect("digits")), ln + 1, col));
            } else if c == '.' && chars.get(i + 1) == Some(&'.') {
                out.push((Tok::Range, ln + 1, col));
                i += 2;
            } else if matches!(c, '+' | '*' | '·' | '×' | '=' | ';' | ',' | '(' | ')') {
                let c = if c == '·' || c == '×' { '*' } else { c };
                out.push((Tok::Sym(c), ln + 1, col));
                i += 1;
            } else {
                let mut op = c.to_string();
                if let Some(&n) = chars.get(i + 1) {
                    if matches!((c, n), ('<', '<') | ('>', '>') | ('*', '*') | ('/', '/')) {
                        op.push(n);
                    }
                }
                i += op.chars().count();
                out.push((Tok::Bad(op), ln + 1, col));
            }
        }
    }
    out
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.1, t.2))
    }

    fn err(&self, message: impl Into<String>) -> SpecError {
        let (line, column) = self.here();
        if let Some(Tok::Bad(op)) = self.peek() {
            return SpecError::UnsupportedOperator { op: op.clone(), line, column };
        }
        SpecError::Syntax { line, column, message: message.into() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SpecError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, SpecError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn end_statement(&mut self) -> Result<(), SpecError> {
        if self.eat(';') || self.peek().is_none() {
            return Ok(());
        }
        if matches!(self.peek(), Some(Tok::Ident(_))) {
            // newline-separated statements without `;`
            return Ok(());
        }
        Err(self.err("expected `;`"))
    }

    fn declaration(&mut self) -> Result<WordBinding, SpecError> {
        let name = self.ident()?;
        self.expect('=')?;
        let mut bits = Vec::new();
        loop {
            let first = self.ident()?;
            if self.peek() == Some(&Tok::Range) {
                self.pos += 1;
                let last = self.ident()?;
                bits.extend(expand_range(&first, &last).ok_or_else(|| self.err(format!("bad range `{first}..{last}`")))?);
            } else {
                bits.push(first);
            }
            if !self.eat(',') && !matches!(self.peek(), Some(Tok::Ident(s)) if s != "unsigned" && s != "signed") {
                break;
            }
        }
        match self.peek() {
            Some(Tok::Ident(s)) if s == "unsigned" => self.pos += 1,
            Some(Tok::Ident(s)) if s == "signed" => return Err(self.err("only unsigned words are supported")),
            _ => {}
        }
        self.end_statement()?;
        Ok(WordBinding::new(name, bits))
    }

    fn expr(&mut self) -> Result<SpecExpr, SpecError> {
        let mut lhs = self.term()?;
        while self.eat('+') {
            let rhs = self.term()?;
            lhs = SpecExpr::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<SpecExpr, SpecError> {
        let mut lhs = self.atom()?;
        while self.eat('*') {
            let rhs = self.atom()?;
            lhs = SpecExpr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<SpecExpr, SpecError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(SpecExpr::Word(s))
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(SpecExpr::Const(n))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => Err(self.err("expected word, constant or `(`")),
        }
    }
}

fn expand_range(first: &str, last: &str) -> Option<Vec<String>> {
    let split = |s: &str| {
        let p = s.trim_end_matches(|c: char| c.is_ascii_digit());
        s[p.len()..].parse::<usize>().ok().map(|i| (p.to_string(), i))
    };
    let (p0, i0) = split(first)?;
    let (p1, i1) = split(last)?;
    if p0 != p1 {
        return None;
    }
    let v: Vec<String> = if i0 <= i1 {
        (i0..=i1).map(|i| format!("{p0}{i}")).collect()
    } else {
        (i1..=i0).rev().map(|i| format!("{p0}{i}")).collect()
    };
    Some(v)
}

pub fn parse_spec(text: &str) -> Result<Spec, SpecError> {
    let toks = lex(text);
    let end = (text.lines().count().max(1), text.lines().last().map_or(1, |l| l.chars().count() + 1));
    let mut p = Parser { toks, pos: 0, end };
    let mut words: Vec<WordBinding> = Vec::new();
    let mut target = None;
    while p.peek().is_some() {
        let kw = p.ident()?;
        if kw == "word" {
            let w = p.declaration()?;
            if words.iter().any(|x| x.name == w.name) {
                return Err(p.err(format!("word `{}` declared twice", w.name)));
            }
            words.push(w);
            continue;
        }
        if target.is_some() {
            return Err(p.err("only one target assignment is allowed"));
        }
        p.expect('=')?;
        let e = p.expr()?;
        p.end_statement()?;
        target = Some((kw, e));
    }
    let (target, expr) = target.ok_or(SpecError::MissingTarget)?;
    let mut seen = HashSet::new();
    for w in &words {
        for b in &w.bits {
            if !seen.insert(b.as_str()) {
                return Err(SpecError::BitCollision(b.clone()));
            }
        }
    }
    if !words.is_empty() {
        for w in expr.words() {
            if !words.iter().any(|x| x.name == w) {
                return Err(SpecError::UnknownWord(w.to_string()));
            }
        }
    }
    Ok(Spec { target, expr, words })
}

impl Spec {
    /// Binds words to the circuit's primary inputs and outputs.
    pub fn resolve(&self, netlist: &Netlist) -> Result<ResolvedSpec, SpecError> {
        let pis: HashSet<&str> = netlist.input_names().collect();
        let pos: HashSet<&str> = netlist.output_names().collect();
        let available: Vec<WordBinding> = if !self.words.is_empty() {
            self.words.clone()
        } else if !netlist.words().is_empty() {
            netlist.words().to_vec()
        } else {
            infer_words(netlist.input_names())
        };
        let by_name: HashMap<&str, &WordBinding> = available.iter().map(|w| (w.name.as_str(), w)).collect();
        let mut inputs = Vec::new();
        for w in self.expr.words() {
            let wb = by_name.get(w).ok_or_else(|| SpecError::UnknownWord(w.to_string()))?;
            for b in &wb.bits {
                if !pis.contains(b.as_str()) {
                    return Err(SpecError::NotABoundary { word: w.to_string(), bit: b.clone(), expected: "input" });
                }
            }
            inputs.push((*wb).clone());
        }
        let output = match by_name.get(self.target.as_str()) {
            Some(w) => {
                for b in &w.bits {
                    if !pos.contains(b.as_str()) {
                        return Err(SpecError::NotABoundary {
                            word: w.name.clone(),
                            bit: b.clone(),
                            expected: "output",
                        });
                    }
                }
                (*w).clone()
            }
            None => WordBinding::new(self.target.clone(), netlist.output_names().map(String::from).collect()),
        };
        let mut seen = HashSet::new();
        for b in inputs.iter().flat_map(|w| &w.bits).chain(&output.bits) {
            if !seen.insert(b.as_str()) {
                return Err(SpecError::BitCollision(b.clone()));
            }
        }
        Ok(ResolvedSpec { expr: self.expr.clone(), output, inputs })
    }
}

impl ResolvedSpec {
    /// Expanded bit-level polynomial, with each input bit mapped to a
    /// variable by `var_of`.
    pub fn expand<F>(&self, var_of: F, limit: usize) -> Result<Polynomial, PolyError>
    where
        F: Fn(&str) -> crate::poly::Var,
    {
        let env = |w: &str| {
            let wb = self.input(w).expect("resolved word");
            let mut p = Polynomial::zero();
            let mut weight = BigInt::one();
            for b in &wb.bits {
                p.add_term(crate::poly::Monomial::var(var_of(b)), weight.clone());
                weight <<= 1;
            }
            p
        };
        self.expr.expand(&env, limit)
    }

    pub fn expand_default(&self, var_of: impl Fn(&str) -> crate::poly::Var) -> Result<Polynomial, PolyError> {
        self.expand(var_of, DEFAULT_TERM_LIMIT)
    }

    /// Integer value of the expression for the given operand values.
    pub fn evaluate(&self, values: &dyn Fn(&str) -> BigInt) -> BigInt {
        self.expr.evaluate(values)
    }

    /// Largest value the expression can take over its operand ranges.
    pub fn max_value(&self) -> BigInt {
        self.expr.evaluate(&|w| {
            let width = self.input(w).map_or(0, WordBinding::width);
            (BigInt::one() << width) - 1
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.max_value().is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product() {
        let s = parse_spec("F = A*B").unwrap();
        assert_eq!(s.target, "F");
        assert_eq!(
            s.expr,
            SpecExpr::Mul(Box::new(SpecExpr::Word("A".into())), Box::new(SpecExpr::Word("B".into())))
        );
        assert!(s.words.is_empty());
    }

    #[test]
    fn mac_with_declarations() {
        let s = parse_spec("word A = a0..a3 unsigned;\nword B = b0..b3 unsigned;\nword C = c0, c1 unsigned;\nF = A*B + C;").unwrap();
        assert_eq!(s.expr.to_string(), "A*B + C");
        assert_eq!(s.words[0].bits, vec!["a0", "a1", "a2", "a3"]);
        assert_eq!(s.words[2].bits, vec!["c0", "c1"]);
        assert_eq!(parse_spec("F = A × (B + C)").unwrap().expr.to_string(), "A*(B + C)");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_spec("F = A / B"),
            Err(SpecError::UnsupportedOperator { ref op, line: 1, column: 7 }) if op == "/"
        ));
        assert!(matches!(parse_spec("F = A - B"), Err(SpecError::UnsupportedOperator { .. })));
        assert_eq!(parse_spec("word A = a0..a1;\nF = A*B;"), Err(SpecError::UnknownWord("B".into())));
        assert_eq!(
            parse_spec("word A = a0..a1;\nword B = a1..a2;\nF = A*B;"),
            Err(SpecError::BitCollision("a1".into()))
        );
        assert_eq!(parse_spec("word A = a0..a1;"), Err(SpecError::MissingTarget));
        assert!(matches!(parse_spec("F = A +"), Err(SpecError::Syntax { .. })));
    }
}
