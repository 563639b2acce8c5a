//! NPN canonical forms of 3-input truth tables.
//!
//! Truth tables are bytes: bit `m` is the value at minterm `m`, where input
//! `i` is bit `i` of `m` (`x0 = 0xAA`, `x1 = 0xCC`, `x2 = 0xF0`).

use std::sync::OnceLock;

pub const X0: u8 = 0xAA;
pub const X1: u8 = 0xCC;
pub const X2: u8 = 0xF0;

pub const XOR3: u8 = 0x96;
pub const MAJ3: u8 = 0xE8;
pub const XOR2: u8 = 0x66;
pub const AND2: u8 = 0x88;

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// `f` with inputs permuted by `perm`, negated by `neg` and the output
/// negated when `out` is set.
pub fn transform(f: u8, perm: [usize; 3], neg: u8, out: bool) -> u8 {
    let mut g = 0u8;
    for m in 0..8u8 {
        let x = m ^ neg;
        let mut src = 0u8;
        for (i, &p) in perm.iter().enumerate() {
            src |= ((x >> i) & 1) << p;
        }
        let bit = ((f >> src) & 1) ^ out as u8;
        g |= bit << m;
    }
    g
}

fn table() -> &'static [u8; 256] {
    static TABLE: OnceLock<[u8; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u8; 256];
        for f in 0..=255u8 {
            let mut best = u8::MAX;
            for perm in PERMS {
                for neg in 0..8u8 {
                    for out in [false, true] {
                        best = best.min(transform(f, perm, neg, out));
                    }
                }
            }
            t[f as usize] = best;
        }
        t
    })
}

/// Smallest table over all 96 NPN transforms (6 permutations, 8 input
/// negations, 2 output negations).
pub fn canonical(f: u8) -> u8 {
    table()[f as usize]
}

pub fn is_xor3_class(f: u8) -> bool {
    canonical(f) == canonical(XOR3)
}

pub fn is_maj3_class(f: u8) -> bool {
    canonical(f) == canonical(MAJ3)
}

pub fn is_xor2_class(f: u8) -> bool {
    canonical(f) == canonical(XOR2)
}

pub fn is_and2_class(f: u8) -> bool {
    canonical(f) == canonical(AND2)
}

/// Number of distinct NPN classes over 3 inputs.
pub fn class_count() -> usize {
    let mut v: Vec<u8> = table().to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}
