//! AIGER 1.9 reader and writer (ASCII `aag` and binary `aig`),
//! combinational subset.

use std::collections::HashMap;

use super::{GateFn, Netlist, NetlistBuilder, NetlistError};

/// Raw contents of a combinational AIGER file. Literals are `2·var + neg`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AigerData {
    pub max_var: u32,
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    /// `(lhs, rhs0, rhs1)`
    pub ands: Vec<(u32, u32, u32)>,
    pub input_names: Vec<Option<String>>,
    pub output_names: Vec<Option<String>>,
    pub comment: Option<String>,
}

fn malformed(msg: impl Into<String>) -> NetlistError {
    NetlistError::Malformed(msg.into())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Option<&'a str> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += (end + 1).min(rest.len());
        std::str::from_utf8(&rest[..end]).ok().map(|s| s.trim_end_matches('\r'))
    }

    fn varint(&mut self) -> Result<u32, NetlistError> {
        let mut x: u64 = 0;
        let mut shift = 0;
        loop {
            let Some(&b) = self.bytes.get(self.pos) else {
                return Err(NetlistError::Truncated("delta encoding ends mid-number".into()));
            };
            self.pos += 1;
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                break;
            }
            shift += 7;
            if shift > 35 {
                return Err(malformed("delta exceeds 32 bits"));
            }
        }
        u32::try_from(x).map_err(|_| malformed("delta exceeds 32 bits"))
    }
}

fn numbers(line: &str, expected: usize, what: &str) -> Result<Vec<u32>, NetlistError> {
    let v: Result<Vec<u32>, _> = line.split_whitespace().map(str::parse).collect();
    match v {
        Ok(v) if v.len() == expected => Ok(v),
        _ => Err(malformed(format!("bad {what} line `{line}`"))),
    }
}

fn encode_varint(out: &mut Vec<u8>, mut x: u32) {
    while x >= 0x80 {
        out.push((x as u8 & 0x7f) | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

impl AigerData {
    pub fn decode(bytes: &[u8]) -> Result<AigerData, NetlistError> {
        let mut cur = Cursor { bytes, pos: 0 };
        let header = cur.line().ok_or_else(|| malformed("missing header"))?;
        let mut fields = header.split_whitespace();
        let binary = match fields.next() {
            Some("aag") => false,
            Some("aig") => true,
            _ => return Err(malformed(format!("bad header `{header}`"))),
        };
        let nums: Result<Vec<u32>, _> = fields.map(str::parse).collect();
        let nums = nums.map_err(|_| malformed(format!("bad header `{header}`")))?;
        if nums.len() < 5 || nums.len() > 9 {
            return Err(malformed(format!("bad header `{header}`")));
        }
        let (m, i, l, o, a) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
        if l > 0 || nums[5..].iter().any(|&x| x > 0) {
            return Err(NetlistError::Sequential);
        }
        if u64::from(i) + u64::from(a) > u64::from(m) {
            return Err(malformed("M < I + L + A"));
        }
        let max_lit = 2 * m + 1;
        let mut d = AigerData { max_var: m, ..Default::default() };

        for k in 0..i {
            if binary {
                d.inputs.push(2 * (k + 1));
            } else {
                let line = cur.line().ok_or_else(|| NetlistError::Truncated("input section".into()))?;
                let lit = numbers(line, 1, "input")?[0];
                if lit & 1 == 1 || lit < 2 || lit > max_lit {
                    return Err(malformed(format!("invalid input literal {lit}")));
                }
                d.inputs.push(lit);
            }
        }
        for _ in 0..o {
            let line = cur.line().ok_or_else(|| NetlistError::Truncated("output section".into()))?;
            let lit = numbers(line, 1, "output")?[0];
            if lit > max_lit {
                return Err(malformed(format!("invalid output literal {lit}")));
            }
            d.outputs.push(lit);
        }
        for k in 0..a {
            let (lhs, r0, r1) = if binary {
                let lhs = 2 * (i + k + 1);
                let d0 = cur.varint()?;
                let d1 = cur.varint()?;
                let r0 = lhs.checked_sub(d0).ok_or_else(|| malformed("negative rhs0"))?;
                let r1 = r0.checked_sub(d1).ok_or_else(|| malformed("negative rhs1"))?;
                (lhs, r0, r1)
            } else {
                let line = cur.line().ok_or_else(|| NetlistError::Truncated("and section".into()))?;
                let v = numbers(line, 3, "and")?;
                (v[0], v[1], v[2])
            };
            if lhs & 1 == 1 || lhs < 2 || [lhs, r0, r1].iter().any(|&x| x > max_lit) {
                return Err(malformed(format!("invalid and gate {lhs} {r0} {r1}")));
            }
            d.ands.push((lhs, r0, r1));
        }

        d.input_names = vec![None; d.inputs.len()];
        d.output_names = vec![None; d.outputs.len()];
        while let Some(line) = cur.line() {
            if line == "c" {
                let rest = &bytes[cur.pos.min(bytes.len())..];
                d.comment = Some(String::from_utf8_lossy(rest).trim_end().to_string());
                break;
            }
            if line.is_empty() {
                continue;
            }
            let (tag, name) = line.split_once(' ').ok_or_else(|| malformed(format!("bad symbol `{line}`")))?;
            let (kind, idx) = tag.split_at(1);
            let idx: usize = idx.parse().map_err(|_| malformed(format!("bad symbol `{line}`")))?;
            let slot = match kind {
                "i" => d.input_names.get_mut(idx),
                "o" => d.output_names.get_mut(idx),
                "l" | "b" | "c" | "j" | "f" => return Err(NetlistError::Sequential),
                _ => return Err(malformed(format!("bad symbol `{line}`"))),
            };
            *slot.ok_or_else(|| malformed(format!("symbol index out of range `{line}`")))? = Some(name.to_string());
        }
        Ok(d)
    }

    pub fn encode(&self, binary: bool) -> Vec<u8> {
        let mut out = Vec::new();
        let tag = if binary { "aig" } else { "aag" };
        out.extend_from_slice(
            format!("{tag} {} {} 0 {} {}\n", self.max_var, self.inputs.len(), self.outputs.len(), self.ands.len())
                .as_bytes(),
        );
        if !binary {
            for &i in &self.inputs {
                out.extend_from_slice(format!("{i}\n").as_bytes());
            }
        }
        for &o in &self.outputs {
            out.extend_from_slice(format!("{o}\n").as_bytes());
        }
        for &(lhs, r0, r1) in &self.ands {
            if binary {
                let (hi, lo) = if r0 >= r1 { (r0, r1) } else { (r1, r0) };
                encode_varint(&mut out, lhs - hi);
                encode_varint(&mut out, hi - lo);
            } else {
                out.extend_from_slice(format!("{lhs} {r0} {r1}\n").as_bytes());
            }
        }
        for (k, n) in self.input_names.iter().enumerate() {
            if let Some(n) = n {
                out.extend_from_slice(format!("i{k} {n}\n").as_bytes());
            }
        }
        for (k, n) in self.output_names.iter().enumerate() {
            if let Some(n) = n {
                out.extend_from_slice(format!("o{k} {n}\n").as_bytes());
            }
        }
        if let Some(c) = &self.comment {
            out.extend_from_slice(b"c\n");
            out.extend_from_slice(c.as_bytes());
            out.push(b'\n');
        }
        out
    }

    /// Lowers to a netlist: ANDs are `n<var>`, complemented literals become
    /// NOT gates `<name>_inv`, outputs are BUF/NOT gates named by symbol or
    /// `o<k>`.
    pub fn to_netlist(&self, name: &str) -> Result<Netlist, NetlistError> {
        let mut b = NetlistBuilder::new(name);
        let mut var_name: HashMap<u32, String> = HashMap::new();
        for (k, &lit) in self.inputs.iter().enumerate() {
            let n = self.input_names[k].clone().unwrap_or_else(|| format!("i{k}"));
            if var_name.insert(lit / 2, n.clone()).is_some() {
                return Err(malformed(format!("input literal {lit} declared twice")));
            }
            b.input(&n);
        }
        for &(lhs, _, _) in &self.ands {
            if var_name.contains_key(&(lhs / 2)) {
                return Err(NetlistError::MultiplyDriven(format!("n{}", lhs / 2)));
            }
            var_name.insert(lhs / 2, format!("n{}", lhs / 2));
        }

        let mut made: HashMap<u32, String> = HashMap::new();
        let mut signal = |b: &mut NetlistBuilder, lit: u32| -> Result<String, NetlistError> {
            if let Some(s) = made.get(&lit) {
                return Ok(s.clone());
            }
            let s = match lit {
                0 => {
                    b.gate(GateFn::Const0, "const0", &[]);
                    "const0".to_string()
                }
                1 => {
                    b.gate(GateFn::Const1, "const1", &[]);
                    "const1".to_string()
                }
                _ => {
                    let base = var_name
                        .get(&(lit / 2))
                        .cloned()
                        .ok_or_else(|| NetlistError::Undriven(format!("n{}", lit / 2)))?;
                    if lit & 1 == 0 {
                        base
                    } else {
                        let inv = format!("{base}_inv");
                        b.gate(GateFn::Not, &inv, &[&base]);
                        inv
                    }
                }
            };
            made.insert(lit, s.clone());
            Ok(s)
        };

        for &(lhs, r0, r1) in &self.ands {
            let a = signal(&mut b, r0)?;
            let c = signal(&mut b, r1)?;
            b.gate(GateFn::And, &format!("n{}", lhs / 2), &[&a, &c]);
        }
        for (k, &lit) in self.outputs.iter().enumerate() {
            let n = self.output_names[k].clone().unwrap_or_else(|| format!("o{k}"));
            let positive = lit >= 2 && var_name.get(&(lit / 2)) == Some(&n);
            if positive && lit & 1 == 0 {
                b.output(&n);
                continue;
            }
            match lit {
                0 => b.gate(GateFn::Const0, &n, &[]),
                1 => b.gate(GateFn::Const1, &n, &[]),
                _ => {
                    let base = signal(&mut b, lit & !1)?;
                    b.gate(if lit & 1 == 1 { GateFn::Not } else { GateFn::Buf }, &n, &[&base])
                }
            };
            b.output(&n);
        }
        b.build()
    }
}

pub fn parse_aiger(bytes: &[u8]) -> Result<Netlist, NetlistError> {
    AigerData::decode(bytes)?.to_netlist("aiger")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let n = parse_aiger(b"aag 1 1 0 1 0\n2\n2\n").unwrap();
        assert_eq!(n.num_inputs(), 1);
        assert_eq!(n.outputs().len(), 1);
        assert_eq!(n.simulate(&[0xF0])[0], 0xF0);
    }

    #[test]
    fn binary_single_and() {
        // lhs 6, rhs 4 and 2: deltas 2 and 2
        let n = parse_aiger(b"aig 3 2 0 1 1\n6\n\x02\x02i0 a\ni1 b\no0 y\n").unwrap();
        assert_eq!(n.num_inputs(), 2);
        assert_eq!(n.gates().iter().filter(|g| g.func == GateFn::And).count(), 1);
        assert_eq!(n.simulate(&[0b1010, 0b1100])[0] & 0xF, 0b1000);
    }

    #[test]
    fn latch_rejected() {
        let e = parse_aiger(b"aag 1 0 1 0 0\n2 3\n").unwrap_err();
        assert_eq!(e.to_string(), "sequential circuits unsupported");
    }

    #[test]
    fn truncated_binary() {
        let e = parse_aiger(b"aig 3 2 0 1 1\n6\n\x82").unwrap_err();
        assert!(matches!(e, NetlistError::Truncated(_)));
    }

    #[test]
    fn varint_round_trip() {
        for x in [0u32, 1, 127, 128, 300, 16384, u32::MAX] {
            let mut buf = Vec::new();
            encode_varint(&mut buf, x);
            let mut c = Cursor { bytes: &buf, pos: 0 };
            assert_eq!(c.varint().unwrap(), x);
        }
    }

    #[test]
    fn encode_decode() {
        let d = AigerData::decode(b"aag 3 2 0 1 1\n2\n4\n7\n6 4 2\ni0 a\ni1 b\no0 nand\n").unwrap();
        for binary in [false, true] {
            let again = AigerData::decode(&d.encode(binary)).unwrap();
            assert_eq!(again.ands, vec![(6, 4, 2)]);
            assert_eq!(again.output_names, d.output_names);
        }
    }
}
