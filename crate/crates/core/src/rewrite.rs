//! Backward rewriting: substitute AND-node variables by their fanin models,
//! highest id first, until only primary inputs remain.

use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{Aig, AigEdge};
use crate::poly::{reduce_symmetric, Monomial, Polynomial, Var, DEFAULT_TERM_LIMIT};
use crate::spectrum::Spectrum;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("term limit {limit} exceeded while eliminating node {node}")]
    Blowup { node: u32, limit: usize },
    #[error("time budget exhausted while eliminating node {node}")]
    Timeout { node: u32 },
    #[error("memory limit of {limit} bytes exceeded while eliminating node {node}")]
    Memory { node: u32, limit: usize },
}

impl RewriteError {
    pub fn node(&self) -> u32 {
        match self {
            RewriteError::Blowup { node, .. } | RewriteError::Timeout { node } | RewriteError::Memory { node, .. } => {
                *node
            }
        }
    }
}

/// 2 GiB.
pub const DEFAULT_MEMORY_LIMIT: usize = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteOptions {
    pub term_limit: usize,
    /// Approximate ceiling on working-set bytes.
    pub memory_limit: usize,
    pub deadline: Option<Instant>,
    /// Reduce coefficients modulo `2^bits`.
    pub modulus_bits: Option<u32>,
    pub trace: bool,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions {
            term_limit: DEFAULT_TERM_LIMIT,
            memory_limit: DEFAULT_MEMORY_LIMIT,
            deadline: None,
            modulus_bits: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    /// `None` for the initial snapshot.
    pub eliminated: Option<u32>,
    pub terms: usize,
    pub spectrum: Spectrum,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RewriteTrace {
    pub entries: Vec<TraceEntry>,
    /// Every eliminated variable, in order.
    pub eliminated: Vec<u32>,
    pub interval: usize,
}

impl RewriteTrace {
    pub fn final_spectrum(&self) -> Option<&Spectrum> {
        self.entries.last().map(|e| &e.spectrum)
    }

    /// JSON lines, one snapshot per line.
    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&serde_json::to_string(e).expect("trace entry serializes"));
            s.push('\n');
        }
        s
    }
}

/// Snapshot interval: every step for small graphs, else about 100 snapshots.
pub fn snapshot_interval(num_nodes: usize) -> usize {
    if num_nodes <= 200 {
        1
    } else {
        num_nodes / 100
    }
}

/// Incremental rewriting state. Terms live in a slab indexed by monomial,
/// with per-variable occurrence lists that are pruned lazily.
pub struct Rewriter<'a> {
    g: &'a Aig,
    slab: Vec<Option<(Monomial, BigInt)>>,
    index: HashMap<Monomial, usize>,
    occ: HashMap<u32, Vec<usize>>,
    heap: BinaryHeap<u32>,
    queued: HashSet<u32>,
    live: usize,
    bytes: usize,
    opts: RewriteOptions,
    steps: usize,
    trace: RewriteTrace,
}

impl<'a> Rewriter<'a> {
    pub fn new(g: &'a Aig, start: &Polynomial, opts: RewriteOptions) -> Self {
        let mut r = Rewriter {
            g,
            slab: Vec::new(),
            index: HashMap::new(),
            occ: HashMap::new(),
            heap: BinaryHeap::new(),
            queued: HashSet::new(),
            live: 0,
            bytes: 0,
            opts,
            steps: 0,
            trace: RewriteTrace { interval: snapshot_interval(g.num_nodes()), ..Default::default() },
        };
        for (m, c) in start.terms() {
            r.add(m.clone(), c.clone());
        }
        if opts.trace {
            r.snapshot(None);
        }
        r
    }

    fn add(&mut self, m: Monomial, c: BigInt) {
        let c = match self.opts.modulus_bits {
            Some(b) => reduce_symmetric(&c, b),
            None => c,
        };
        if c.is_zero() {
            return;
        }
        if let Some(&slot) = self.index.get(&m) {
            let entry = self.slab[slot].as_mut().expect("indexed slot is live");
            entry.1 += c;
            if let Some(b) = self.opts.modulus_bits {
                entry.1 = reduce_symmetric(&entry.1, b);
            }
            if entry.1.is_zero() {
                self.slab[slot] = None;
                self.index.remove(&m);
                self.live -= 1;
                self.bytes -= footprint(&m);
            }
            return;
        }
        let slot = self.slab.len();
        for &v in m.vars() {
            if self.g.is_and(v.0) {
                self.occ.entry(v.0).or_default().push(slot);
                if self.queued.insert(v.0) {
                    self.heap.push(v.0);
                }
            }
        }
        self.live += 1;
        self.bytes += footprint(&m);
        self.index.insert(m.clone(), slot);
        self.slab.push(Some((m, c)));
    }

    /// Drops dead slots and stale occurrences.
    fn compact(&mut self) {
        self.slab.retain(Option::is_some);
        self.slab.shrink_to_fit();
        self.index.clear();
        self.occ.clear();
        for (slot, (m, _)) in self.slab.iter().flatten().enumerate() {
            self.index.insert(m.clone(), slot);
            for &v in m.vars() {
                if self.g.is_and(v.0) {
                    self.occ.entry(v.0).or_default().push(slot);
                }
            }
        }
        self.index.shrink_to_fit();
    }

    fn snapshot(&mut self, eliminated: Option<u32>) {
        let spectrum = Spectrum::from_terms(self.slab.iter().flatten().map(|(m, c)| (m.degree(), c)));
        self.trace.entries.push(TraceEntry { step: self.steps, eliminated, terms: self.live, spectrum });
    }

    pub fn is_done(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Eliminates the highest remaining AND variable. Returns it, or `None`
    /// when only inputs remain.
    pub fn step(&mut self) -> Result<Option<u32>, RewriteError> {
        let Some(v) = self.heap.pop() else { return Ok(None) };
        if let Some(d) = self.opts.deadline {
            if Instant::now() >= d {
                return Err(RewriteError::Timeout { node: v });
            }
        }
        let node = *self.g.node(v);
        let model = and_model(node.fanin0, node.fanin1);
        let slots = self.occ.remove(&v).unwrap_or_default();
        let var = Var(v);
        let mut taken = Vec::with_capacity(slots.len());
        for slot in slots {
            let Some((m, _)) = &self.slab[slot] else { continue };
            if !m.contains(var) {
                continue;
            }
            let (m, c) = self.slab[slot].take().expect("live slot");
            self.index.remove(&m);
            self.live -= 1;
            self.bytes -= footprint(&m);
            taken.push((m.without(var), c));
        }
        for (rest, c) in taken {
            for (mm, k) in &model {
                let coef = if *k == 1 { c.clone() } else { -&c };
                self.add(rest.product(mm), coef);
            }
            if self.live > self.opts.term_limit {
                return Err(RewriteError::Blowup { node: v, limit: self.opts.term_limit });
            }
            if self.bytes > self.opts.memory_limit {
                return Err(RewriteError::Memory { node: v, limit: self.opts.memory_limit });
            }
        }
        if self.slab.len() > 2 * self.live + 4096 {
            self.compact();
        }
        self.steps += 1;
        self.trace.eliminated.push(v);
        if self.opts.trace && (self.steps.is_multiple_of(self.trace.interval) || self.heap.is_empty()) {
            self.snapshot(Some(v));
        }
        Ok(Some(v))
    }

    pub fn run(mut self) -> Result<(Polynomial, RewriteTrace), RewriteError> {
        while self.step()?.is_some() {}
        if self.opts.trace && self.trace.entries.last().map(|e| e.step) != Some(self.steps) {
            self.snapshot(self.trace.eliminated.last().copied());
        }
        Ok((self.current(), self.trace))
    }

    /// The working polynomial.
    pub fn current(&self) -> Polynomial {
        Polynomial::from_terms(self.slab.iter().flatten().map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn trace(&self) -> &RewriteTrace {
        &self.trace
    }
}

/// Rough heap cost of one live term, counting dead slots that await
/// compaction.
fn footprint(m: &Monomial) -> usize {
    160 + 24 * m.degree()
}

/// Terms of `L(e0)·L(e1)` with `L(e) = x` or `1 - x`, as (monomial, ±1).
fn and_model(e0: AigEdge, e1: AigEdge) -> Vec<(Monomial, i8)> {
    let lit = |e: AigEdge| -> Vec<(Monomial, i8)> {
        let x = Monomial::var(Var(e.id()));
        if e.is_complemented() {
            vec![(Monomial::one(), 1), (x, -1)]
        } else {
            vec![(x, 1)]
        }
    };
    let mut out: Vec<(Monomial, i8)> = Vec::with_capacity(4);
    for (a, sa) in lit(e0) {
        for (b, sb) in lit(e1) {
            out.push((a.product(&b), sa * sb));
        }
    }
    out
}

/// `Σ 2^i·z_i` over output edges, as a polynomial in node variables.
pub fn output_signature(edges: &[AigEdge]) -> Polynomial {
    let mut p = Polynomial::zero();
    let mut w = BigInt::one();
    for &e in edges {
        add_edge(&mut p, e, &w);
        w <<= 1;
    }
    p
}

/// Adds `w·e` where a complemented edge contributes `w·(1 - x)`.
pub fn add_edge(p: &mut Polynomial, e: AigEdge, w: &BigInt) {
    if e.is_const() {
        if e.is_complemented() {
            p.add_term(Monomial::one(), w.clone());
        }
        return;
    }
    let x = Monomial::var(Var(e.id()));
    if e.is_complemented() {
        p.add_term(Monomial::one(), w.clone());
        p.add_term(x, -w);
    } else {
        p.add_term(x, w.clone());
    }
}

/// Rewrites `start` (over node variables of `g`) to primary inputs.
pub fn rewrite_to_pis(
    g: &Aig,
    start: &Polynomial,
    opts: RewriteOptions,
) -> Result<(Polynomial, RewriteTrace), RewriteError> {
    Rewriter::new(g, start, opts).run()
}

/// Largest input support handled by [`small_cone_polynomial`].
pub const SMALL_SUPPORT: usize = 6;

/// Polynomial of `root` over its input support, computed from the cone's
/// truth table by a Möbius transform. `None` when the support exceeds
/// [`SMALL_SUPPORT`] inputs.
pub fn small_cone_polynomial(g: &Aig, root: u32) -> Option<Polynomial> {
    small_cone_terms(g, root).map(Polynomial::from_terms)
}

fn small_cone_terms(g: &Aig, root: u32) -> Option<Vec<(Monomial, i64)>> {
    const PROJ: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    // Cones here are a handful of nodes, so linear scans beat hashing.
    let mut nodes: Vec<u32> = Vec::new();
    let mut support: Vec<u32> = Vec::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if g.is_and(id) {
            if nodes.contains(&id) {
                continue;
            }
            if nodes.len() > 64 {
                return None;
            }
            nodes.push(id);
            let n = g.node(id);
            stack.push(n.fanin0.id());
            stack.push(n.fanin1.id());
        } else if id != 0 && !support.contains(&id) {
            support.push(id);
            if support.len() > SMALL_SUPPORT {
                return None;
            }
        }
    }
    support.sort_unstable();
    nodes.sort_unstable();
    let k = support.len();
    let mut val: Vec<(u32, u64)> = Vec::with_capacity(nodes.len() + k + 1);
    val.push((0, 0));
    for (i, &v) in support.iter().enumerate() {
        val.push((v, PROJ[i]));
    }
    let lit = |val: &[(u32, u64)], e: AigEdge| {
        let x = val.iter().find(|(id, _)| *id == e.id()).expect("fanin evaluated").1;
        if e.is_complemented() {
            !x
        } else {
            x
        }
    };
    for &id in &nodes {
        let n = g.node(id);
        let x = lit(&val, n.fanin0) & lit(&val, n.fanin1);
        val.push((id, x));
    }
    let t = val.last().expect("root evaluated").1;
    let mut c: Vec<i64> = (0..1usize << k).map(|m| (t >> m & 1) as i64).collect();
    for i in 0..k {
        for m in 0..1usize << k {
            if m >> i & 1 == 1 {
                c[m] -= c[m ^ (1 << i)];
            }
        }
    }
    Some(
        c.into_iter()
            .enumerate()
            .filter(|(_, x)| *x != 0)
            .map(|(m, x)| {
                let vars = (0..k).filter(|i| m >> i & 1 == 1).map(|i| Var(support[i]));
                (Monomial::from_vars(vars), x)
            })
            .collect(),
    )
}

/// `offset + Σ w(v)·F_v` where `F_v` is node `v` over primary inputs.
/// Cones with small support are read off their truth tables; the rest are
/// rewritten together.
pub fn rewrite_frontier(
    g: &Aig,
    weights: &std::collections::BTreeMap<u32, BigInt>,
    offset: &BigInt,
    opts: RewriteOptions,
) -> Result<Polynomial, RewriteError> {
    let mut acc: HashMap<Monomial, BigInt> = HashMap::new();
    acc.insert(Monomial::one(), offset.clone());
    let mut rest = Vec::new();
    for (&v, w) in weights {
        match small_cone_terms(g, v) {
            Some(terms) => {
                for (m, c) in terms {
                    *acc.entry(m).or_default() += w * c;
                }
                if acc.len() > opts.term_limit {
                    return Err(RewriteError::Blowup { node: v, limit: opts.term_limit });
                }
            }
            None => rest.push(v),
        }
    }
    let mut start = Polynomial::zero();
    for v in &rest {
        start.add_term(Monomial::var(Var(*v)), weights[v].clone());
    }
    if !start.is_zero() {
        let (wide, _) = rewrite_to_pis(g, &start, RewriteOptions { trace: false, ..opts })?;
        for (m, c) in wide.terms() {
            *acc.entry(m.clone()).or_default() += c;
        }
    }
    let p = match opts.modulus_bits {
        Some(b) => Polynomial::from_terms(acc.into_iter().map(|(m, c)| (m, reduce_symmetric(&c, b)))),
        None => Polynomial::from_terms(acc),
    };
    if p.len() > opts.term_limit {
        let node = weights.keys().next_back().copied().unwrap_or(0);
        return Err(RewriteError::Blowup { node, limit: opts.term_limit });
    }
    Ok(p)
}
