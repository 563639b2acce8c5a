//! Seeded single-gate bug injection.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{GateFn, Netlist, SignalId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("bug count must be at least 1")]
    NoBugs,
    #[error("circuit has {available} mutable gates, {requested} bugs requested")]
    TooSmall { available: usize, requested: usize },
    #[error("no observable mutation found after {attempts} attempts")]
    Unobservable { attempts: usize },
}

/// Which gates may be mutated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    #[default]
    Adders,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MutationKind {
    GateSwap { from: GateFn, to: GateFn },
    Rewire { pin: usize, from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mutation {
    pub gate: String,
    #[serde(flatten)]
    pub kind: MutationKind,
}

fn swapped(f: GateFn) -> Option<GateFn> {
    Some(match f {
        GateFn::And => GateFn::Or,
        GateFn::Or => GateFn::And,
        GateFn::Xor => GateFn::Xnor,
        GateFn::Xnor => GateFn::Xor,
        GateFn::Nand => GateFn::Nor,
        GateFn::Nor => GateFn::Nand,
        _ => return None,
    })
}

fn rebuild(n: &Netlist, gates: &[(SignalId, GateFn, Vec<SignalId>)]) -> Netlist {
    let mut b = Netlist::builder(n.name());
    for name in n.input_names() {
        b.input(name);
    }
    for (out, f, ins) in gates {
        let ins: Vec<&str> = ins.iter().map(|&i| n.signal_name(i)).collect();
        b.gate(*f, n.signal_name(*out), &ins);
    }
    for name in n.output_names() {
        b.output(name);
    }
    for w in n.words() {
        b.word(w.clone());
    }
    b.build().expect("mutation keeps the netlist acyclic")
}

/// Whether `a` and `b` differ on some input: exhaustively up to 16 inputs,
/// else on 64·256 seeded random patterns.
pub fn differs(a: &Netlist, b: &Netlist, seed: u64) -> bool {
    let k = a.num_inputs();
    if k <= 16 {
        let total = 1u64 << k;
        return (0..total).step_by(64).any(|base| {
            let lanes = 64.min(total - base);
            let pis: Vec<u64> =
                (0..k).map(|i| (0..lanes).fold(0u64, |acc, l| acc | (((base + l) >> i) & 1) << l)).collect();
            let mask = if lanes == 64 { u64::MAX } else { (1u64 << lanes) - 1 };
            a.simulate(&pis).iter().zip(b.simulate(&pis)).any(|(x, y)| (x ^ y) & mask != 0)
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..256).any(|_| {
        let pis: Vec<u64> = (0..k).map(|_| rng.gen()).collect();
        a.simulate(&pis) != b.simulate(&pis)
    })
}

/// Applies `count` seeded mutations to distinct gates of `region` (gate
/// output names), or to every two-input gate with [`Region::All`]. Each
/// mutation is kept only if it changes the circuit's function.
pub fn inject_bugs(
    n: &Netlist,
    region: &BTreeSet<String>,
    scope: Region,
    count: usize,
    seed: u64,
) -> Result<(Netlist, Vec<Mutation>), GenError> {
    if count == 0 {
        return Err(GenError::NoBugs);
    }
    let mut gates: Vec<(SignalId, GateFn, Vec<SignalId>)> =
        n.gates().iter().map(|g| (g.output, g.func, g.fanins.clone())).collect();
    let mut candidates: Vec<usize> = gates
        .iter()
        .enumerate()
        .filter(|(_, (out, f, _))| {
            swapped(*f).is_some() && (scope == Region::All || region.contains(n.signal_name(*out)))
        })
        .map(|(i, _)| i)
        .collect();
    if candidates.len() < count {
        return Err(GenError::TooSmall { available: candidates.len(), requested: count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = n.clone();
    let mut applied = Vec::new();
    let attempts = 64 * candidates.len().max(16);
    for _ in 0..attempts {
        if applied.len() == count {
            break;
        }
        let Some(pos) = (0..candidates.len()).collect::<Vec<_>>().choose(&mut rng).copied() else { break };
        let gi = candidates[pos];
        let (out, f, ins) = gates[gi].clone();
        let kind = if rng.gen_bool(0.5) {
            let to = swapped(f).expect("candidate has a dual");
            gates[gi].1 = to;
            MutationKind::GateSwap { from: f, to }
        } else {
            let pin = rng.gen_range(0..ins.len());
            let to = rng.gen_range(0..out);
            if ins.contains(&to) {
                continue;
            }
            gates[gi].2[pin] = to;
            MutationKind::Rewire { pin, from: n.signal_name(ins[pin]).into(), to: n.signal_name(to).into() }
        };
        let next = rebuild(n, &gates);
        if differs(&current, &next, rng.gen()) {
            current = next;
            applied.push(Mutation { gate: n.signal_name(out).into(), kind });
            candidates.swap_remove(pos);
        } else {
            gates[gi] = (out, f, ins);
        }
    }
    if applied.len() < count {
        return Err(GenError::Unobservable { attempts });
    }
    Ok((current, applied))
}
