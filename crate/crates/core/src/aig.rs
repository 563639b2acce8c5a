//! Structurally hashed And-Inverter Graphs.
//!
//! Node 0 is constant FALSE, nodes `1..=num_pis` are primary inputs and all
//! later nodes are two-input ANDs whose fanins have smaller ids, so id order
//! is a topological order.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::ops::Not;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::netlist::aiger::AigerData;
use crate::netlist::{GateFn, Netlist};

/// A possibly complemented reference to a node, encoded as `2·id + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AigEdge(u32);

impl AigEdge {
    pub const FALSE: AigEdge = AigEdge(0);
    pub const TRUE: AigEdge = AigEdge(1);

    pub fn new(id: u32, complemented: bool) -> Self {
        AigEdge(id << 1 | complemented as u32)
    }

    pub fn from_lit(lit: u32) -> Self {
        AigEdge(lit)
    }

    pub fn lit(self) -> u32 {
        self.0
    }

    pub fn id(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.id() == 0
    }

    pub fn regular(self) -> Self {
        AigEdge(self.0 & !1)
    }

    pub fn with_complement(self, c: bool) -> Self {
        AigEdge(self.0 ^ c as u32)
    }
}

impl Not for AigEdge {
    type Output = AigEdge;
    fn not(self) -> AigEdge {
        AigEdge(self.0 ^ 1)
    }
}

impl fmt::Display for AigEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!{}", self.id())
        } else {
            write!(f, "{}", self.id())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AigNode {
    pub fanin0: AigEdge,
    pub fanin1: AigEdge,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AigError {
    #[error("expected {expected} input pattern vectors, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("pattern vectors differ in length ({expected} vs {got} words)")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Default)]
pub struct Aig {
    nodes: Vec<AigNode>,
    num_pis: usize,
    pos: Vec<AigEdge>,
    pi_names: Vec<String>,
    po_names: Vec<String>,
    signal_names: Vec<Option<String>>,
    strash: HashMap<(AigEdge, AigEdge), u32>,
}

impl PartialEq for Aig {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.num_pis == other.num_pis
            && self.pos == other.pos
            && self.pi_names == other.pi_names
            && self.po_names == other.po_names
    }
}

impl Aig {
    pub fn new() -> Self {
        Aig {
            nodes: vec![AigNode { fanin0: AigEdge::FALSE, fanin1: AigEdge::FALSE }],
            signal_names: vec![None],
            ..Default::default()
        }
    }

    /// Adds a primary input. All inputs must be added before any AND node.
    pub fn add_pi(&mut self, name: &str) -> AigEdge {
        assert_eq!(self.nodes.len(), self.num_pis + 1, "inputs must precede AND nodes");
        let id = self.nodes.len() as u32;
        self.nodes.push(AigNode { fanin0: AigEdge::FALSE, fanin1: AigEdge::FALSE });
        self.signal_names.push(None);
        self.pi_names.push(name.to_string());
        self.num_pis += 1;
        AigEdge::new(id, false)
    }

    pub fn add_po(&mut self, edge: AigEdge, name: &str) {
        self.pos.push(edge);
        self.po_names.push(name.to_string());
    }

    pub fn and(&mut self, a: AigEdge, b: AigEdge) -> AigEdge {
        if a == AigEdge::FALSE || b == AigEdge::FALSE || a == !b {
            return AigEdge::FALSE;
        }
        if a == AigEdge::TRUE || a == b {
            return b;
        }
        if b == AigEdge::TRUE {
            return a;
        }
        let key = if a.lit() <= b.lit() { (a, b) } else { (b, a) };
        if let Some(&id) = self.strash.get(&key) {
            return AigEdge::new(id, false);
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(AigNode { fanin0: key.0, fanin1: key.1 });
        self.signal_names.push(None);
        self.strash.insert(key, id);
        AigEdge::new(id, false)
    }

    /// Existing node for `a ∧ b`, without creating one.
    pub fn lookup_and(&self, a: AigEdge, b: AigEdge) -> Option<AigEdge> {
        let key = if a.lit() <= b.lit() { (a, b) } else { (b, a) };
        self.strash.get(&key).map(|&id| AigEdge::new(id, false))
    }

    pub fn or(&mut self, a: AigEdge, b: AigEdge) -> AigEdge {
        !self.and(!a, !b)
    }

    /// `a ⊕ b` as `¬(a∧b) ∧ ¬(¬a∧¬b)`.
    pub fn xor(&mut self, a: AigEdge, b: AigEdge) -> AigEdge {
        let both = self.and(a, b);
        let neither = self.and(!a, !b);
        self.and(!both, !neither)
    }

    pub fn gate(&mut self, func: GateFn, fanins: &[AigEdge]) -> AigEdge {
        match func {
            GateFn::Const0 => AigEdge::FALSE,
            GateFn::Const1 => AigEdge::TRUE,
            GateFn::Buf => fanins[0],
            GateFn::Not => !fanins[0],
            GateFn::And => self.and(fanins[0], fanins[1]),
            GateFn::Or => self.or(fanins[0], fanins[1]),
            GateFn::Xor => self.xor(fanins[0], fanins[1]),
            GateFn::Nand => !self.and(fanins[0], fanins[1]),
            GateFn::Nor => !self.or(fanins[0], fanins[1]),
            GateFn::Xnor => !self.xor(fanins[0], fanins[1]),
        }
    }

    /// DeMorgan conversion of a validated netlist.
    pub fn from_netlist(n: &Netlist) -> Aig {
        let mut g = Aig::new();
        let mut edge = vec![AigEdge::FALSE; n.num_signals()];
        for i in n.inputs() {
            edge[i as usize] = g.add_pi(n.signal_name(i));
        }
        for gate in n.gates() {
            let ins: Vec<AigEdge> = gate.fanins.iter().map(|&f| edge[f as usize]).collect();
            let e = g.gate(gate.func, &ins);
            edge[gate.output as usize] = e;
            let slot = &mut g.signal_names[e.id() as usize];
            if slot.is_none() && e.id() as usize > g.num_pis {
                *slot = Some(n.signal_name(gate.output).to_string());
            }
        }
        for &o in n.outputs() {
            g.add_po(edge[o as usize], n.signal_name(o));
        }
        g
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_pis(&self) -> usize {
        self.num_pis
    }

    pub fn num_ands(&self) -> usize {
        self.nodes.len() - 1 - self.num_pis
    }

    pub fn node(&self, id: u32) -> &AigNode {
        &self.nodes[id as usize]
    }

    pub fn is_pi(&self, id: u32) -> bool {
        id >= 1 && (id as usize) <= self.num_pis
    }

    pub fn is_and(&self, id: u32) -> bool {
        (id as usize) > self.num_pis
    }

    pub fn pis(&self) -> impl ExactSizeIterator<Item = u32> {
        1..self.num_pis as u32 + 1
    }

    pub fn ands(&self) -> impl ExactSizeIterator<Item = u32> {
        (self.num_pis as u32 + 1)..(self.nodes.len() as u32)
    }

    pub fn pos(&self) -> &[AigEdge] {
        &self.pos
    }

    pub fn pi_name(&self, index: usize) -> &str {
        &self.pi_names[index]
    }

    pub fn pi_names(&self) -> &[String] {
        &self.pi_names
    }

    pub fn po_names(&self) -> &[String] {
        &self.po_names
    }

    pub fn pi_by_name(&self, name: &str) -> Option<u32> {
        self.pi_names.iter().position(|n| n == name).map(|i| i as u32 + 1)
    }

    pub fn po_by_name(&self, name: &str) -> Option<AigEdge> {
        self.po_names.iter().position(|n| n == name).map(|i| self.pos[i])
    }

    /// Display name of a node: its input name, else the name of an output
    /// it drives, else the netlist signal it came from, else `n<id>`.
    pub fn var_name(&self, id: u32) -> String {
        if id == 0 {
            return "const0".into();
        }
        if self.is_pi(id) {
            return self.pi_names[id as usize - 1].clone();
        }
        if let Some(i) = self.pos.iter().position(|e| e.id() == id && !e.is_complemented()) {
            return self.po_names[i].clone();
        }
        if let Some(n) = &self.signal_names[id as usize] {
            return n.clone();
        }
        format!("n{id}")
    }

    /// Nodes whose display name is `name`.
    pub fn find_by_name(&self, name: &str) -> Option<u32> {
        (0..self.nodes.len() as u32).find(|&id| self.var_name(id) == name)
    }

    /// PIs in declaration order, then AND nodes; every node follows its
    /// fanins.
    pub fn topo_order(&self) -> Vec<u32> {
        (1..self.nodes.len() as u32).collect()
    }

    /// Logic level per node (constant and inputs are level 0).
    pub fn levels(&self) -> Vec<u32> {
        let mut lv = vec![0u32; self.nodes.len()];
        for id in self.ands() {
            let n = self.nodes[id as usize];
            lv[id as usize] = 1 + lv[n.fanin0.id() as usize].max(lv[n.fanin1.id() as usize]);
        }
        lv
    }

    /// AND nodes grouped by level, ascending.
    pub fn level_groups(&self) -> Vec<Vec<u32>> {
        let lv = self.levels();
        let depth = lv.iter().copied().max().unwrap_or(0) as usize;
        let mut groups = vec![Vec::new(); depth];
        for id in self.ands() {
            groups[lv[id as usize] as usize - 1].push(id);
        }
        groups
    }

    /// Number of AND fanins and outputs referencing each node.
    pub fn ref_counts(&self) -> Vec<u32> {
        let mut r = vec![0u32; self.nodes.len()];
        for id in self.ands() {
            let n = self.nodes[id as usize];
            r[n.fanin0.id() as usize] += 1;
            r[n.fanin1.id() as usize] += 1;
        }
        for e in &self.pos {
            r[e.id() as usize] += 1;
        }
        r
    }

    /// Values of every node for one word of 64 patterns per input.
    pub fn simulate_nodes(&self, pis: &[u64]) -> Vec<u64> {
        debug_assert_eq!(pis.len(), self.num_pis);
        let mut v = Vec::with_capacity(self.nodes.len());
        v.push(0u64);
        v.extend_from_slice(pis);
        for id in self.ands() {
            let n = self.nodes[id as usize];
            v.push(edge_value(&v, n.fanin0) & edge_value(&v, n.fanin1));
        }
        v
    }

    pub fn edge_value(values: &[u64], e: AigEdge) -> u64 {
        edge_value(values, e)
    }

    /// Output vectors for per-input pattern vectors: bit `i` of word `w` in
    /// the result for output `o` is the value of `o` under pattern `64w+i`.
    pub fn simulate(&self, patterns: &[Vec<u64>]) -> Result<Vec<Vec<u64>>, AigError> {
        self.simulate_with(patterns, Exec::default())
    }

    pub fn simulate_with(&self, patterns: &[Vec<u64>], exec: Exec) -> Result<Vec<Vec<u64>>, AigError> {
        if patterns.len() != self.num_pis {
            return Err(AigError::InputCount { expected: self.num_pis, got: patterns.len() });
        }
        let words = patterns.first().map_or(1, Vec::len);
        if let Some(bad) = patterns.iter().find(|p| p.len() != words) {
            return Err(AigError::LengthMismatch { expected: words, got: bad.len() });
        }
        let columns = exec.map_range(words, |w| {
            let column: Vec<u64> = patterns.iter().map(|p| p[w]).collect();
            let v = self.simulate_nodes(&column);
            self.pos.iter().map(|&e| edge_value(&v, e)).collect::<Vec<u64>>()
        });
        let mut out = vec![Vec::with_capacity(words); self.pos.len()];
        for col in columns {
            for (o, x) in col.into_iter().enumerate() {
                out[o].push(x);
            }
        }
        Ok(out)
    }

    pub fn to_aiger_data(&self) -> AigerData {
        AigerData {
            max_var: self.nodes.len() as u32 - 1,
            inputs: self.pis().map(|i| 2 * i).collect(),
            outputs: self.pos.iter().map(|e| e.lit()).collect(),
            ands: self
                .ands()
                .map(|id| {
                    let n = self.nodes[id as usize];
                    (2 * id, n.fanin1.lit(), n.fanin0.lit())
                })
                .collect(),
            input_names: self.pi_names.iter().cloned().map(Some).collect(),
            output_names: self.po_names.iter().cloned().map(Some).collect(),
            comment: None,
        }
    }

    pub fn to_aiger(&self, binary: bool) -> Vec<u8> {
        self.to_aiger_data().encode(binary)
    }

    pub fn to_dot(&self) -> String {
        self.to_dot_with(&[])
    }

    /// DOT dump; each `(label, nodes)` group is drawn as a cluster.
    pub fn to_dot_with(&self, groups: &[(String, Vec<u32>)]) -> String {
        let mut s = String::from("digraph aig {\n  rankdir=BT;\n");
        let mut grouped = vec![false; self.nodes.len()];
        for (k, (label, nodes)) in groups.iter().enumerate() {
            let _ = writeln!(s, "  subgraph cluster_{k} {{\n    label=\"{label}\"; style=filled; color=lightyellow;");
            for &id in nodes {
                grouped[id as usize] = true;
                let _ = writeln!(s, "    {id} [label=\"{}\"];", self.var_name(id));
            }
            s.push_str("  }\n");
        }
        for id in 0..self.nodes.len() as u32 {
            if grouped[id as usize] {
                continue;
            }
            let shape = if self.is_and(id) { "ellipse" } else { "box" };
            let _ = writeln!(s, "  {id} [label=\"{}\", shape={shape}];", self.var_name(id));
        }
        for id in self.ands() {
            let n = self.nodes[id as usize];
            for e in [n.fanin0, n.fanin1] {
                let style = if e.is_complemented() { " [style=dashed]" } else { "" };
                let _ = writeln!(s, "  {} -> {id}{style};", e.id());
            }
        }
        for (i, e) in self.pos.iter().enumerate() {
            let style = if e.is_complemented() { ", style=dashed" } else { "" };
            let _ = writeln!(s, "  po{i} [label=\"{}\", shape=plaintext];", self.po_names[i]);
            let _ = writeln!(s, "  {} -> po{i} [arrowhead=none{style}];", e.id());
        }
        s.push_str("}\n");
        s
    }
}

fn edge_value(v: &[u64], e: AigEdge) -> u64 {
    let x = v[e.id() as usize];
    if e.is_complemented() {
        !x
    } else {
        x
    }
}

/// Exhaustive input patterns for `k` inputs, packed 64 per word.
pub fn exhaustive_patterns(k: usize) -> Vec<Vec<u64>> {
    let total = 1usize << k;
    let words = total.div_ceil(64);
    (0..k)
        .map(|i| {
            (0..words)
                .map(|w| {
                    let mut x = 0u64;
                    for b in 0..64 {
                        let p = w * 64 + b;
                        if p < total && (p >> i) & 1 == 1 {
                            x |= 1 << b;
                        }
                    }
                    x
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::blif::parse_blif;

    #[test]
    fn hashing_and_simplification() {
        let mut g = Aig::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let x = g.and(a, b);
        assert_eq!(g.and(b, a), x);
        assert_eq!(g.and(a, a), a);
        assert_eq!(g.and(a, !a), AigEdge::FALSE);
        assert_eq!(g.and(a, AigEdge::TRUE), a);
        assert_eq!(g.num_ands(), 1);
        assert_eq!(!!x, x);
        let n = g.node(x.id());
        assert!(n.fanin0.id() <= n.fanin1.id());
    }

    #[test]
    fn xor_uses_three_nodes() {
        let mut g = Aig::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let x = g.xor(a, b);
        g.add_po(x, "y");
        assert_eq!(g.num_ands(), 3);
        let out = g.simulate(&[vec![0b1010], vec![0b1100]]).unwrap();
        assert_eq!(out[0][0] & 0xF, 0b0110);
    }

    #[test]
    fn single_not_is_complemented_output() {
        let n = parse_blif(".model t\n.inputs a\n.outputs y\n.names a y\n0 1\n.end\n").unwrap();
        let g = Aig::from_netlist(&n);
        assert_eq!(g.num_ands(), 0);
        assert_eq!(g.pos()[0], AigEdge::new(1, true));
    }

    #[test]
    fn topo_and_simulation_basics() {
        let mut g = Aig::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let c = g.add_pi("c");
        let ab = g.and(a, b);
        let abc = g.and(ab, c);
        g.add_po(AigEdge::FALSE, "zero");
        g.add_po(a, "echo");
        assert_eq!(g.topo_order(), vec![1, 2, 3, ab.id(), abc.id()]);
        let out = g.simulate(&exhaustive_patterns(3)).unwrap();
        assert_eq!(out[0], vec![0]);
        assert_eq!(out[1], vec![0b1010_1010]);
        assert_eq!(
            g.simulate(&[vec![1], vec![1, 2], vec![1]]),
            Err(AigError::LengthMismatch { expected: 1, got: 2 })
        );
    }
}
