//! Backward propagation of output-signature weights through an adder tree.
//!
//! The working form is a linear expression `offset + Σ w(v)·v` over node
//! values. An adder with literals `l0, l1, l2` satisfies
//! `l0 + l1 + l2 = 2·carry + sum`, so a sum weighted `α` and a carry weighted
//! `2α` can be replaced by `α` on each literal.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{Aig, AigEdge};
use crate::poly::reduce_symmetric;

use super::detect::AdderInstance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("node {node}: expected weight {expected}, found {found}")]
    WeightConflict { node: u32, expected: BigInt, found: BigInt },
    #[error("adder {adder} (sum {sum}, carry {carry}): carry weight {carry_weight} is not twice sum weight {sum_weight}")]
    RatioViolation { adder: usize, sum: u32, carry: u32, sum_weight: BigInt, carry_weight: BigInt },
}

impl WeightError {
    pub fn node(&self) -> u32 {
        match self {
            WeightError::WeightConflict { node, .. } => *node,
            WeightError::RatioViolation { sum, .. } => *sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightMap {
    /// Nonzero weights of the frontier nodes.
    #[serde(with = "crate::spectrum::bigint_map")]
    pub frontier: BTreeMap<u32, BigInt>,
    #[serde(with = "crate::spectrum::bigint_string")]
    pub offset: BigInt,
    /// Indices of adders that carried weight.
    pub applied: Vec<usize>,
    /// Set when a carry of weight `0 mod 2^bits` was dropped; the expression
    /// then only holds modulo `2^bits`.
    pub modulus_bits: Option<u32>,
}

impl WeightMap {
    /// `offset + Σ w(v)·v` under node values (one pattern bit).
    pub fn value(&self, values: &[u64], bit: u32) -> BigInt {
        let mut acc = self.offset.clone();
        for (&v, w) in &self.frontier {
            if (values[v as usize] >> bit) & 1 == 1 {
                acc += w;
            }
        }
        acc
    }
}

/// Weights of the output signature `Σ w_i·po_i`, including the constant
/// contributed by complemented outputs.
pub fn output_weights(g: &Aig, po_weights: &[(AigEdge, BigInt)]) -> (BTreeMap<u32, BigInt>, BigInt) {
    let _ = g;
    let mut w: BTreeMap<u32, BigInt> = BTreeMap::new();
    let mut offset = BigInt::zero();
    for (e, c) in po_weights {
        add_literal(&mut w, &mut offset, *e, c);
    }
    w.retain(|_, c| !c.is_zero());
    (w, offset)
}

fn add_literal(w: &mut BTreeMap<u32, BigInt>, offset: &mut BigInt, e: AigEdge, c: &BigInt) {
    if e.is_const() {
        if e.is_complemented() {
            *offset += c;
        }
        return;
    }
    let slot = w.entry(e.id()).or_insert_with(BigInt::zero);
    if e.is_complemented() {
        *offset += c;
        *slot -= c;
    } else {
        *slot += c;
    }
}

/// Propagates weights from the outputs through `adders`, consumers before
/// producers. With `modulus_bits`, a carry whose required weight vanishes
/// modulo `2^bits` may be left unweighted. Candidates whose carry never
/// leaves the sum cone are otherwise left on the frontier.
pub fn propagate_weights(
    g: &Aig,
    adders: &[AdderInstance],
    po_weights: &[(AigEdge, BigInt)],
    modulus_bits: Option<u32>,
) -> Result<WeightMap, WeightError> {
    let (mut w, mut offset) = output_weights(g, po_weights);
    let reduce = |x: &BigInt| match modulus_bits {
        Some(b) => reduce_symmetric(x, b),
        None => x.clone(),
    };
    let mut order: Vec<usize> = (0..adders.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(adders[i].sum.min(adders[i].carry)));

    let mut applied = Vec::new();
    let mut dropped = false;
    let zero = BigInt::zero();
    for i in order {
        let a = &adders[i];
        let ws = reduce(w.get(&a.sum).unwrap_or(&zero));
        let wc = reduce(w.get(&a.carry).unwrap_or(&zero));
        if ws.is_zero() && wc.is_zero() {
            continue;
        }
        let alpha = if a.sum_inverted { -&ws } else { ws.clone() };
        let want = reduce(&(&alpha * 2));
        if ws.is_zero() {
            return Err(WeightError::WeightConflict { node: a.sum, expected: &wc / 2, found: zero });
        }
        if wc.is_zero() && !want.is_zero() && a.carry_internal {
            continue;
        }
        if wc.is_zero() && !want.is_zero() {
            return Err(WeightError::WeightConflict { node: a.carry, expected: &alpha * 2, found: zero });
        }
        if wc.is_zero() {
            dropped = true;
        } else if wc != want {
            return Err(WeightError::RatioViolation {
                adder: i,
                sum: a.sum,
                carry: a.carry,
                sum_weight: ws,
                carry_weight: wc,
            });
        }
        w.remove(&a.sum);
        w.remove(&a.carry);
        if a.sum_inverted {
            offset += &ws;
        }
        for &l in &a.inputs {
            add_literal(&mut w, &mut offset, l, &alpha);
        }
        applied.push(i);
    }

    let modulus_bits = if dropped { modulus_bits } else { None };
    let mut frontier = BTreeMap::new();
    for (v, c) in w {
        let c = match modulus_bits {
            Some(b) => reduce_symmetric(&c, b),
            None => c,
        };
        if !c.is_zero() {
            frontier.insert(v, c);
        }
    }
    if let Some(b) = modulus_bits {
        offset = reduce_symmetric(&offset, b);
    }
    Ok(WeightMap { frontier, offset, applied, modulus_bits })
}

/// `2^i` weights for an output word.
pub fn signature_weights(edges: &[AigEdge]) -> Vec<(AigEdge, BigInt)> {
    let mut c = BigInt::one();
    edges
        .iter()
        .map(|&e| {
            let out = (e, c.clone());
            c <<= 1;
            out
        })
        .collect()
}
