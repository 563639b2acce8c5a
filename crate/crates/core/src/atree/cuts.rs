//! 3-feasible cut enumeration with truth tables.

use crate::aig::Aig;
use crate::exec::Exec;

use super::npn::{X0, X1, X2};

/// At most three leaves in ascending id order, with the node's function
/// over them (see [`super::npn`] for the table layout).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cut {
    leaves: [u32; 3],
    len: u8,
    pub truth: u8,
}

const VARS: [u8; 3] = [X0, X1, X2];

impl Cut {
    pub fn trivial(id: u32) -> Cut {
        Cut { leaves: [id, 0, 0], len: 1, truth: X0 }
    }

    pub fn leaves(&self) -> &[u32] {
        &self.leaves[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn dominates(&self, other: &Cut) -> bool {
        self.len <= other.len && self.leaves().iter().all(|l| other.leaves().contains(l))
    }

    /// Truth table re-expressed over the (superset) leaf list `to`.
    fn expand(&self, to: &[u32]) -> u8 {
        let pos: Vec<usize> = self.leaves().iter().map(|l| to.iter().position(|x| x == l).unwrap()).collect();
        let mut t = 0u8;
        for m in 0..8u8 {
            let mut src = 0u8;
            for (i, &p) in pos.iter().enumerate() {
                src |= ((m >> p) & 1) << i;
            }
            t |= ((self.truth >> src) & 1) << m;
        }
        t
    }
}

fn merge(a: &Cut, b: &Cut) -> Option<([u32; 3], usize)> {
    let mut out = [0u32; 3];
    let mut n = 0;
    let (x, y) = (a.leaves(), b.leaves());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let next = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) if p == q => {
                i += 1;
                j += 1;
                p
            }
            (Some(&p), Some(&q)) if p < q => {
                i += 1;
                p
            }
            (_, Some(&q)) => {
                j += 1;
                q
            }
            (Some(&p), None) => {
                i += 1;
                p
            }
            (None, None) => unreachable!(),
        };
        if n == 3 {
            return None;
        }
        out[n] = next;
        n += 1;
    }
    Some((out, n))
}

/// Cuts of every node, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSet {
    cuts: Vec<Vec<Cut>>,
}

impl CutSet {
    pub fn of(&self, id: u32) -> &[Cut] {
        &self.cuts[id as usize]
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn total(&self) -> usize {
        self.cuts.iter().map(Vec::len).sum()
    }
}

fn node_cuts(g: &Aig, cuts: &[Vec<Cut>], id: u32) -> Vec<Cut> {
    let n = g.node(id);
    let (e0, e1) = (n.fanin0, n.fanin1);
    let mut out: Vec<Cut> = Vec::new();
    for c0 in &cuts[e0.id() as usize] {
        for c1 in &cuts[e1.id() as usize] {
            let Some((leaves, len)) = merge(c0, c1) else { continue };
            let mut cut = Cut { leaves, len: len as u8, truth: 0 };
            let mut t0 = c0.expand(cut.leaves());
            let mut t1 = c1.expand(cut.leaves());
            if e0.is_complemented() {
                t0 = !t0;
            }
            if e1.is_complemented() {
                t1 = !t1;
            }
            cut.truth = t0 & t1;
            if out.iter().any(|c| c.dominates(&cut)) {
                continue;
            }
            out.retain(|c| !cut.dominates(c));
            out.push(cut);
        }
    }
    out.push(Cut::trivial(id));
    out
}

/// All irredundant cuts with at most three leaves, trivial cut included.
/// Nodes of one logic level are independent and are processed with `exec`.
pub fn enumerate_cuts(g: &Aig, exec: Exec) -> CutSet {
    let mut cuts: Vec<Vec<Cut>> = vec![Vec::new(); g.num_nodes()];
    cuts[0] = vec![Cut::trivial(0)];
    for id in g.pis() {
        cuts[id as usize] = vec![Cut::trivial(id)];
    }
    for level in g.level_groups() {
        let computed = exec.map(&level, |&id| node_cuts(g, &cuts, id));
        for (id, c) in level.into_iter().zip(computed) {
            cuts[id as usize] = c;
        }
    }
    CutSet { cuts }
}

/// Function of the cut variables as a truth table over `leaves`, by
/// evaluating the node cone.
pub fn cone_truth(g: &Aig, root: u32, leaves: &[u32]) -> Option<u8> {
    let mut memo = std::collections::HashMap::new();
    for (i, &l) in leaves.iter().enumerate() {
        memo.insert(l, VARS[i]);
    }
    fn go(g: &Aig, id: u32, memo: &mut std::collections::HashMap<u32, u8>) -> Option<u8> {
        if let Some(&t) = memo.get(&id) {
            return Some(t);
        }
        if !g.is_and(id) {
            return None;
        }
        let n = *g.node(id);
        let a = go(g, n.fanin0.id(), memo)? ^ if n.fanin0.is_complemented() { 0xFF } else { 0 };
        let b = go(g, n.fanin1.id(), memo)? ^ if n.fanin1.is_complemented() { 0xFF } else { 0 };
        memo.insert(id, a & b);
        Some(a & b)
    }
    go(g, root, &mut memo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::Aig;

    #[test]
    fn and_node_cuts() {
        let mut g = Aig::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let c = g.and(a, b);
        let cs = enumerate_cuts(&g, Exec::Sequential);
        let cuts = cs.of(c.id());
        assert_eq!(cuts.len(), 2);
        assert_eq!(cuts[0].leaves(), &[1, 2]);
        assert_eq!(cuts[0].truth, 0x88);
        assert_eq!(cuts[1].leaves(), &[c.id()]);
    }

    #[test]
    fn xor_root_has_xor_cut() {
        let mut g = Aig::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let x = g.xor(a, b);
        let cs = enumerate_cuts(&g, Exec::Parallel);
        let cut = cs.of(x.id()).iter().find(|c| c.leaves() == [1, 2]).unwrap();
        assert_eq!(cut.truth, 0x66);
        assert_eq!(cone_truth(&g, x.id(), &[1, 2]), Some(0x66));
    }

    #[test]
    fn cuts_are_irredundant_and_consistent() {
        let mut g = Aig::new();
        let ins: Vec<_> = (0..4).map(|i| g.add_pi(&format!("x{i}"))).collect();
        let s1 = g.xor(ins[0], ins[1]);
        let s = g.xor(s1, ins[2]);
        let t = g.and(s, !ins[3]);
        let cs = enumerate_cuts(&g, Exec::Sequential);
        for id in g.ands() {
            let cuts = cs.of(id);
            for (i, c) in cuts.iter().enumerate() {
                assert!(c.leaves().windows(2).all(|w| w[0] < w[1]));
                if c.len() > 1 {
                    assert_eq!(cone_truth(&g, id, c.leaves()), Some(c.truth), "node {id}");
                }
                for (j, d) in cuts.iter().enumerate() {
                    assert!(i == j || !c.dominates(d));
                }
            }
        }
        assert!(cs.of(t.id()).iter().all(|c| c.len() <= 3));
        assert_eq!(enumerate_cuts(&g, Exec::Parallel), cs);
    }
}
