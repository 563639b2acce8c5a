//! Gate-level netlists and their file formats.
//!
//! A [`Netlist`] is immutable once built. Building validates arity, drivers
//! and acyclicity, then renumbers signals canonically: primary inputs take
//! ids `0..npi` and the output of gate `i` (in topological order) takes id
//! `npi + i`.

pub mod aiger;
pub mod blif;
pub mod spec;

use std::collections::{BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type SignalId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateFn {
    Const0,
    Const1,
    Buf,
    Not,
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
}

impl GateFn {
    pub const ALL: [GateFn; 10] = [
        GateFn::Const0,
        GateFn::Const1,
        GateFn::Buf,
        GateFn::Not,
        GateFn::And,
        GateFn::Or,
        GateFn::Xor,
        GateFn::Nand,
        GateFn::Nor,
        GateFn::Xnor,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateFn::Const0 | GateFn::Const1 => 0,
            GateFn::Buf | GateFn::Not => 1,
            _ => 2,
        }
    }

    /// Bitwise evaluation, 64 patterns at a time.
    pub fn eval(self, a: u64, b: u64) -> u64 {
        match self {
            GateFn::Const0 => 0,
            GateFn::Const1 => !0,
            GateFn::Buf => a,
            GateFn::Not => !a,
            GateFn::And => a & b,
            GateFn::Or => a | b,
            GateFn::Xor => a ^ b,
            GateFn::Nand => !(a & b),
            GateFn::Nor => !(a | b),
            GateFn::Xnor => !(a ^ b),
        }
    }

    /// Truth table over the fanins: bit `i` is the output when fanin `j`
    /// takes bit `j` of `i`.
    pub fn truth_table(self) -> u8 {
        let n = 1u32 << self.arity();
        (0..n).fold(0u8, |t, i| {
            let v = self.eval(if i & 1 != 0 { !0 } else { 0 }, if i & 2 != 0 { !0 } else { 0 }) & 1;
            t | ((v as u8) << i)
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            GateFn::Const0 => "CONST0",
            GateFn::Const1 => "CONST1",
            GateFn::Buf => "BUF",
            GateFn::Not => "NOT",
            GateFn::And => "AND",
            GateFn::Or => "OR",
            GateFn::Xor => "XOR",
            GateFn::Nand => "NAND",
            GateFn::Nor => "NOR",
            GateFn::Xnor => "XNOR",
        }
    }
}

impl fmt::Display for GateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub output: SignalId,
    pub func: GateFn,
    pub fanins: Vec<SignalId>,
}

/// An unsigned word: bit names, least significant first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordBinding {
    pub name: String,
    pub bits: Vec<String>,
}

impl WordBinding {
    pub fn new<S: Into<String>>(name: S, bits: Vec<String>) -> Self {
        WordBinding { name: name.into(), bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: unsupported construct `{construct}`")]
    Unsupported { line: usize, construct: String },
    #[error("signal `{0}` is used but never driven")]
    Undriven(String),
    #[error("signal `{0}` is driven more than once")]
    MultiplyDriven(String),
    #[error("combinational cycle through `{0}`")]
    Cycle(String),
    #[error("output `{0}` is listed twice")]
    DuplicateOutput(String),
    #[error("gate `{signal}`: {func} takes {expected} fanin(s), got {got}")]
    Arity { signal: String, func: GateFn, expected: usize, got: usize },
    #[error("sequential circuits unsupported")]
    Sequential,
    #[error("malformed AIGER: {0}")]
    Malformed(String),
    #[error("truncated AIGER: {0}")]
    Truncated(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    name: String,
    names: Vec<String>,
    index: HashMap<String, SignalId>,
    num_inputs: usize,
    outputs: Vec<SignalId>,
    gates: Vec<Gate>,
    words: Vec<WordBinding>,
}

impl Netlist {
    pub fn builder<S: Into<String>>(name: S) -> NetlistBuilder {
        NetlistBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_signals(&self) -> usize {
        self.names.len()
    }

    pub fn signal_name(&self, id: SignalId) -> &str {
        &self.names[id as usize]
    }

    pub fn signal(&self, name: &str) -> Option<SignalId> {
        self.index.get(name).copied()
    }

    pub fn inputs(&self) -> impl ExactSizeIterator<Item = SignalId> {
        0..self.num_inputs as SignalId
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.names[..self.num_inputs].iter().map(String::as_str)
    }

    pub fn outputs(&self) -> &[SignalId] {
        &self.outputs
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.outputs.iter().map(|&o| self.signal_name(o))
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_input(&self, id: SignalId) -> bool {
        (id as usize) < self.num_inputs
    }

    /// The gate driving `id`, if it is not a primary input.
    pub fn driver(&self, id: SignalId) -> Option<&Gate> {
        (id as usize).checked_sub(self.num_inputs).map(|i| &self.gates[i])
    }

    pub fn words(&self) -> &[WordBinding] {
        &self.words
    }

    pub fn word(&self, name: &str) -> Option<&WordBinding> {
        self.words.iter().find(|w| w.name == name)
    }

    pub fn with_words(mut self, words: Vec<WordBinding>) -> Self {
        self.words = words;
        self
    }

    /// Values of every signal for 64 patterns per word. `pis[i]` holds the
    /// patterns of input `i`.
    pub fn simulate_signals(&self, pis: &[u64]) -> Vec<u64> {
        assert_eq!(pis.len(), self.num_inputs, "one pattern word per input");
        let mut v = Vec::with_capacity(self.names.len());
        v.extend_from_slice(pis);
        for g in &self.gates {
            let a = g.fanins.first().map_or(0, |&x| v[x as usize]);
            let b = g.fanins.get(1).map_or(0, |&x| v[x as usize]);
            v.push(g.func.eval(a, b));
        }
        v
    }

    /// Output values for 64 patterns per word.
    pub fn simulate(&self, pis: &[u64]) -> Vec<u64> {
        let v = self.simulate_signals(pis);
        self.outputs.iter().map(|&o| v[o as usize]).collect()
    }
}

/// Mutable netlist under construction. Signals are referenced by name and
/// may be used before they are driven.
#[derive(Debug, Clone)]
pub struct NetlistBuilder {
    name: String,
    names: Vec<String>,
    index: HashMap<String, SignalId>,
    inputs: Vec<SignalId>,
    outputs: Vec<SignalId>,
    gates: Vec<(SignalId, GateFn, Vec<SignalId>)>,
    words: Vec<WordBinding>,
}

impl NetlistBuilder {
    pub fn new<S: Into<String>>(name: S) -> Self {
        NetlistBuilder {
            name: name.into(),
            names: Vec::new(),
            index: HashMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            gates: Vec::new(),
            words: Vec::new(),
        }
    }

    fn intern(&mut self, name: &str) -> SignalId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as SignalId;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn input(&mut self, name: &str) -> &mut Self {
        let id = self.intern(name);
        self.inputs.push(id);
        self
    }

    pub fn output(&mut self, name: &str) -> &mut Self {
        let id = self.intern(name);
        self.outputs.push(id);
        self
    }

    pub fn gate(&mut self, func: GateFn, output: &str, fanins: &[&str]) -> &mut Self {
        let out = self.intern(output);
        let ins = fanins.iter().map(|f| self.intern(f)).collect();
        self.gates.push((out, func, ins));
        self
    }

    pub fn word(&mut self, word: WordBinding) -> &mut Self {
        self.words.push(word);
        self
    }

    pub fn has_signal(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn build(&self) -> Result<Netlist, NetlistError> {
        let n = self.names.len();
        let name_of = |id: SignalId| self.names[id as usize].clone();
        let mut driver: Vec<Option<usize>> = vec![None; n];
        let mut is_pi = vec![false; n];
        for &i in &self.inputs {
            if is_pi[i as usize] {
                return Err(NetlistError::MultiplyDriven(name_of(i)));
            }
            is_pi[i as usize] = true;
        }
        for (gi, (out, func, ins)) in self.gates.iter().enumerate() {
            if ins.len() != func.arity() {
                return Err(NetlistError::Arity {
                    signal: name_of(*out),
                    func: *func,
                    expected: func.arity(),
                    got: ins.len(),
                });
            }
            let o = *out as usize;
            if is_pi[o] || driver[o].is_some() {
                return Err(NetlistError::MultiplyDriven(name_of(*out)));
            }
            driver[o] = Some(gi);
        }
        for (out, _, ins) in &self.gates {
            let _ = out;
            for &f in ins {
                if !is_pi[f as usize] && driver[f as usize].is_none() {
                    return Err(NetlistError::Undriven(name_of(f)));
                }
            }
        }
        let mut seen = vec![false; n];
        for &o in &self.outputs {
            if seen[o as usize] {
                return Err(NetlistError::DuplicateOutput(name_of(o)));
            }
            seen[o as usize] = true;
            if !is_pi[o as usize] && driver[o as usize].is_none() {
                return Err(NetlistError::Undriven(name_of(o)));
            }
        }

        // Stable Kahn: among ready gates, the earliest declared goes first.
        let ng = self.gates.len();
        let mut pending = vec![0usize; ng];
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (gi, (_, _, ins)) in self.gates.iter().enumerate() {
            for &f in ins {
                if let Some(_d) = driver[f as usize] {
                    pending[gi] += 1;
                    users[f as usize].push(gi);
                }
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> =
            (0..ng).filter(|&g| pending[g] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(ng);
        while let Some(Reverse(g)) = ready.pop() {
            order.push(g);
            let out = self.gates[g].0 as usize;
            for &u in &users[out] {
                pending[u] -= 1;
                if pending[u] == 0 {
                    ready.push(Reverse(u));
                }
            }
        }
        if order.len() != ng {
            let stuck = (0..ng).find(|&g| pending[g] > 0).expect("unscheduled gate");
            return Err(NetlistError::Cycle(name_of(self.gates[stuck].0)));
        }

        let mut remap = vec![SignalId::MAX; n];
        let mut names = Vec::with_capacity(self.inputs.len() + ng);
        for &i in &self.inputs {
            remap[i as usize] = names.len() as SignalId;
            names.push(name_of(i));
        }
        for &g in &order {
            let out = self.gates[g].0;
            remap[out as usize] = names.len() as SignalId;
            names.push(name_of(out));
        }
        let gates = order
            .iter()
            .map(|&g| {
                let (out, func, ins) = &self.gates[g];
                Gate {
                    output: remap[*out as usize],
                    func: *func,
                    fanins: ins.iter().map(|&f| remap[f as usize]).collect(),
                }
            })
            .collect();
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i as SignalId)).collect();
        Ok(Netlist {
            name: self.name.clone(),
            names,
            index,
            num_inputs: self.inputs.len(),
            outputs: self.outputs.iter().map(|&o| remap[o as usize]).collect(),
            gates,
            words: self.words.clone(),
        })
    }
}

/// Splits `a12` into (`a`, 12).
fn split_indexed(name: &str) -> Option<(&str, usize)> {
    let digits = name.len() - name.bytes().rev().take_while(u8::is_ascii_digit).count();
    if digits == 0 || digits == name.len() {
        return None;
    }
    let (prefix, idx) = name.split_at(digits);
    if idx.len() > 1 && idx.starts_with('0') {
        return None;
    }
    Some((prefix, idx.parse().ok()?))
}

/// Groups signal names of the form `<prefix><index>` into words named by
/// the upper-cased prefix. Groups whose indices are not exactly `0..k` are
/// ignored.
pub fn infer_words<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Vec<WordBinding> {
    let mut groups: Vec<(String, Vec<(usize, String)>)> = Vec::new();
    for name in names {
        let Some((prefix, idx)) = split_indexed(name) else { continue };
        let key = prefix.to_uppercase();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, bits)) => bits.push((idx, name.to_string())),
            None => groups.push((key, vec![(idx, name.to_string())])),
        }
    }
    groups
        .into_iter()
        .filter_map(|(key, mut bits)| {
            bits.sort();
            if bits.iter().enumerate().all(|(i, (idx, _))| *idx == i) {
                Some(WordBinding::new(key, bits.into_iter().map(|(_, n)| n).collect()))
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_reorders_topologically() {
        let mut b = Netlist::builder("t");
        b.input("a").input("b").output("y");
        b.gate(GateFn::Not, "y", &["t"]);
        b.gate(GateFn::And, "t", &["a", "b"]);
        let n = b.build().unwrap();
        assert_eq!(n.gates()[0].func, GateFn::And);
        assert_eq!(n.signal_name(n.gates()[0].output), "t");
        assert_eq!(n.outputs(), &[3]);
        // all 4 patterns in one word: a = 0101, b = 0011
        assert_eq!(n.simulate(&[0b1010, 0b1100])[0] & 0xF, 0b0111);
    }

    #[test]
    fn validation_errors() {
        let mut b = Netlist::builder("t");
        b.input("a").output("y").gate(GateFn::And, "y", &["a", "ghost"]);
        assert_eq!(b.build(), Err(NetlistError::Undriven("ghost".into())));

        let mut b = Netlist::builder("t");
        b.input("a").output("y");
        b.gate(GateFn::Buf, "y", &["a"]).gate(GateFn::Not, "y", &["a"]);
        assert_eq!(b.build(), Err(NetlistError::MultiplyDriven("y".into())));

        let mut b = Netlist::builder("t");
        b.input("a").output("y");
        b.gate(GateFn::And, "y", &["a", "z"]).gate(GateFn::Not, "z", &["y"]);
        assert!(matches!(b.build(), Err(NetlistError::Cycle(_))));

        let mut b = Netlist::builder("t");
        b.input("a").output("y").gate(GateFn::And, "y", &["a"]);
        assert!(matches!(b.build(), Err(NetlistError::Arity { expected: 2, got: 1, .. })));

        let mut b = Netlist::builder("t");
        b.input("a").output("a").output("a");
        assert_eq!(b.build(), Err(NetlistError::DuplicateOutput("a".into())));
    }

    #[test]
    fn truth_tables() {
        assert_eq!(GateFn::And.truth_table(), 0b1000);
        assert_eq!(GateFn::Xor.truth_table(), 0b0110);
        assert_eq!(GateFn::Not.truth_table(), 0b01);
        assert_eq!(GateFn::Const1.truth_table(), 0b1);
    }

    #[test]
    fn word_inference() {
        let w = infer_words(["a1", "b0", "a0", "b1", "cin", "x2"]);
        assert_eq!(w.len(), 2);
        assert_eq!(w[0], WordBinding::new("A", vec!["a0".into(), "a1".into()]));
        assert_eq!(w[1].name, "B");
    }
}
