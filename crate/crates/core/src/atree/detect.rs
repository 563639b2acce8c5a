//! Half/full adder detection from XOR3/MAJ3 cut pairs.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::aig::{Aig, AigEdge};

use super::cuts::CutSet;
use super::npn::{self, X0, X1, X2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AdderKind {
    #[serde(rename = "FA")]
    Fa,
    #[serde(rename = "HA")]
    Ha,
}

/// A detected adder. Inputs are literals `l0, l1, l2` (the third is a
/// constant edge for a half adder) such that the carry node computes
/// `MAJ(l0, l1, l2)` and the sum node computes `l0 ⊕ l1 ⊕ l2`, complemented
/// when `sum_inverted` is set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdderInstance {
    pub kind: AdderKind,
    pub inputs: Vec<AigEdge>,
    pub sum: u32,
    pub carry: u32,
    pub sum_inverted: bool,
    /// The carry only feeds the sum's own cone: either an XOR's internal AND
    /// or a carry that is discarded.
    #[serde(default)]
    pub carry_internal: bool,
}

impl AdderInstance {
    /// Values of `(l0 + l1 + l2, sum, carry)` from node values.
    pub fn observe(&self, values: &[u64], bit: u32) -> (u32, u32, u32) {
        let get = |e: AigEdge| ((Aig::edge_value(values, e) >> bit) & 1) as u32;
        let ins: u32 = self.inputs.iter().map(|&e| get(e)).sum();
        let s = get(AigEdge::new(self.sum, self.sum_inverted));
        let c = get(AigEdge::new(self.carry, false));
        (ins, s, c)
    }
}

const LITS: [u8; 3] = [X0, X1, X2];

fn maj(a: u8, b: u8, c: u8) -> u8 {
    (a & b) | (a & c) | (b & c)
}

/// Input polarities making `carry == MAJ(lits)`; unique by self-duality.
fn solve(leaves: &[u32], sum: u8, carry: u8) -> Option<(Vec<AigEdge>, bool)> {
    let mut found = None;
    let consts: &[Option<bool>] = if leaves.len() == 2 { &[Some(false), Some(true)] } else { &[None] };
    for neg in 0..(1u8 << leaves.len()) {
        for &k in consts {
            let t = |i: usize| if neg >> i & 1 == 1 { !LITS[i] } else { LITS[i] };
            let third = match k {
                Some(true) => 0xFF,
                Some(false) => 0x00,
                None => t(2),
            };
            let (l0, l1) = (t(0), t(1));
            if maj(l0, l1, third) != carry {
                continue;
            }
            let x = l0 ^ l1 ^ third;
            if sum != x && sum != !x {
                continue;
            }
            let mut inputs: Vec<AigEdge> =
                leaves.iter().enumerate().map(|(i, &l)| AigEdge::new(l, neg >> i & 1 == 1)).collect();
            if let Some(c) = k {
                inputs.push(if c { AigEdge::TRUE } else { AigEdge::FALSE });
            }
            if found.is_some() {
                return None;
            }
            found = Some((inputs, sum != x));
        }
    }
    found
}

/// AND nodes between `root` and `leaves`, root included, leaves excluded.
pub fn cone(g: &Aig, root: u32, leaves: &[u32]) -> Vec<u32> {
    let mut seen = HashSet::new();
    let mut stack = vec![root];
    let mut out = Vec::new();
    while let Some(id) = stack.pop() {
        if leaves.contains(&id) || !g.is_and(id) || !seen.insert(id) {
            continue;
        }
        out.push(id);
        let n = g.node(id);
        stack.push(n.fanin0.id());
        stack.push(n.fanin1.id());
    }
    out
}

/// Fanout AND nodes per node.
pub fn fanouts(g: &Aig) -> Vec<Vec<u32>> {
    let mut f = vec![Vec::new(); g.num_nodes()];
    for id in g.ands() {
        let n = g.node(id);
        f[n.fanin0.id() as usize].push(id);
        if n.fanin1.id() != n.fanin0.id() {
            f[n.fanin1.id() as usize].push(id);
        }
    }
    f
}

/// Matches XOR-class and MAJ-class cuts on identical leaves, then keeps a
/// non-overlapping subset, preferring adders closer to the outputs.
pub fn detect_adders(g: &Aig, cuts: &CutSet) -> Vec<AdderInstance> {
    let mut groups: BTreeMap<Vec<u32>, (Vec<(u32, u8)>, Vec<(u32, u8)>)> = BTreeMap::new();
    for id in g.ands() {
        for c in cuts.of(id) {
            let (xor, maj) = match c.len() {
                2 => (npn::is_xor2_class(c.truth), npn::is_and2_class(c.truth)),
                3 => (npn::is_xor3_class(c.truth), npn::is_maj3_class(c.truth)),
                _ => continue,
            };
            if xor || maj {
                let e = groups.entry(c.leaves().to_vec()).or_default();
                if xor {
                    e.0.push((id, c.truth));
                } else {
                    e.1.push((id, c.truth));
                }
            }
        }
    }

    let fo = fanouts(g);
    let po_driven: HashSet<u32> = g.pos().iter().map(|e| e.id()).collect();
    let mut candidates = Vec::new();
    for (leaves, (xors, majs)) in &groups {
        for &(s, st) in xors {
            for &(c, ct) in majs {
                let Some((inputs, sum_inverted)) = solve(leaves, st, ct) else { continue };
                let sum_cone = cone(g, s, leaves);
                let refs = &fo[c as usize];
                let carry_internal = !po_driven.contains(&c) && refs.iter().all(|r| sum_cone.contains(r));
                let kind = if leaves.len() == 3 { AdderKind::Fa } else { AdderKind::Ha };
                let mut cover = sum_cone;
                cover.extend(cone(g, c, leaves));
                candidates.push((AdderInstance { kind, inputs, sum: s, carry: c, sum_inverted, carry_internal }, cover));
            }
        }
    }
    candidates.sort_by(|(a, _), (b, _)| {
        let key = |x: &AdderInstance| (x.sum.max(x.carry), !x.carry_internal, x.sum.min(x.carry));
        key(b).cmp(&key(a)).then(a.kind.cmp(&b.kind))
    });

    let mut covered: HashSet<u32> = HashSet::new();
    let mut roots: HashSet<u32> = HashSet::new();
    let mut out = Vec::new();
    for (a, cover) in candidates {
        if covered.contains(&a.sum) || covered.contains(&a.carry) || cover.iter().any(|n| roots.contains(n)) {
            continue;
        }
        roots.insert(a.sum);
        roots.insert(a.carry);
        covered.extend(cover);
        out.push(a);
    }
    out
}
