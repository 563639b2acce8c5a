//! Combinational BLIF subset: `.model`, `.inputs`, `.outputs`, `.names`,
//! `.end`.
//!
//! Covers whose truth table matches a basic gate become that gate; other
//! covers expand to AND/OR/NOT trees with helper signals `<out>__t<k>`.

use std::fmt::Write as _;

use super::{GateFn, Netlist, NetlistBuilder, NetlistError};

#[derive(Debug, Clone)]
struct Token {
    text: String,
    line: usize,
    column: usize,
}

fn syntax(t: &Token, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax { line: t.line, column: t.column, message: message.into() }
}

/// Logical lines after comment stripping and `\` continuation.
fn logical_lines(text: &str) -> Vec<Vec<Token>> {
    let mut out = Vec::new();
    let mut cur: Vec<Token> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let (body, cont) = match body.trim_end().strip_suffix('\\') {
            Some(b) => (b, true),
            None => (body, false),
        };
        let mut col = 0;
        for piece in body.split_inclusive(char::is_whitespace) {
            let word = piece.trim_end();
            if !word.is_empty() {
                cur.push(Token { text: word.to_string(), line: ln + 1, column: col + 1 });
            }
            col += piece.chars().count();
        }
        if !cont && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

struct Cover {
    signals: Vec<String>,
    rows: Vec<(Token, Vec<u8>, bool)>,
}

pub fn parse_blif(text: &str) -> Result<Netlist, NetlistError> {
    let mut model = None;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut covers: Vec<Cover> = Vec::new();
    let mut ended = false;

    for line in logical_lines(text) {
        let head = &line[0];
        if ended {
            return Err(syntax(head, "content after .end"));
        }
        if let Some(directive) = head.text.strip_prefix('.') {
            let args = || line[1..].iter().map(|t| t.text.clone());
            match directive {
                "model" => {
                    if model.is_some() {
                        return Err(NetlistError::Unsupported { line: head.line, construct: "multiple .model".into() });
                    }
                    model = Some(line.get(1).map_or_else(|| "top".to_string(), |t| t.text.clone()));
                }
                "inputs" => inputs.extend(args()),
                "outputs" => outputs.extend(args()),
                "names" => {
                    if line.len() < 2 {
                        return Err(syntax(head, ".names needs an output signal"));
                    }
                    covers.push(Cover { signals: args().collect(), rows: Vec::new() });
                }
                "end" => ended = true,
                _ => {
                    return Err(NetlistError::Unsupported { line: head.line, construct: head.text.clone() })
                }
            }
            continue;
        }
        let Some(cover) = covers.last_mut() else {
            return Err(syntax(head, "cover row outside .names"));
        };
        let k = cover.signals.len() - 1;
        let (cube, value) = match (k, line.len()) {
            (0, 1) => ("", &line[0]),
            (_, 2) if k > 0 => (line[0].text.as_str(), &line[1]),
            _ => return Err(syntax(head, format!("expected {} input column(s) and an output column", k))),
        };
        if cube.chars().count() != k {
            return Err(syntax(head, format!("cube has {} literal(s), expected {}", cube.chars().count(), k)));
        }
        let mut lits = Vec::with_capacity(k);
        for (i, ch) in cube.chars().enumerate() {
            lits.push(match ch {
                '0' => 0u8,
                '1' => 1,
                '-' => 2,
                _ => {
                    return Err(NetlistError::Syntax {
                        line: head.line,
                        column: head.column + i,
                        message: format!("invalid literal `{ch}`"),
                    })
                }
            });
        }
        let on = match value.text.as_str() {
            "1" => true,
            "0" => false,
            _ => return Err(syntax(value, format!("invalid output value `{}`", value.text))),
        };
        if let Some((_, _, first)) = cover.rows.first() {
            if *first != on {
                return Err(syntax(value, "cover mixes on-set and off-set rows"));
            }
        }
        cover.rows.push((value.clone(), lits, on));
    }

    let mut builder = NetlistBuilder::new(model.unwrap_or_else(|| "top".into()));
    for i in &inputs {
        builder.input(i);
    }
    for o in &outputs {
        builder.output(o);
    }
    for c in &covers {
        lower_cover(&mut builder, c)?;
    }
    builder.build()
}

fn lower_cover(b: &mut NetlistBuilder, c: &Cover) -> Result<(), NetlistError> {
    let out = c.signals.last().unwrap().as_str();
    let ins: Vec<&str> = c.signals[..c.signals.len() - 1].iter().map(String::as_str).collect();
    let offset = c.rows.first().is_some_and(|r| !r.2);
    let k = ins.len();

    if k <= 4 {
        let mut tt: u16 = 0;
        for m in 0..(1u32 << k) {
            let covered = c.rows.iter().any(|(_, lits, _)| {
                lits.iter().enumerate().all(|(j, &l)| l == 2 || l == ((m >> j) & 1) as u8)
            });
            if covered != offset {
                tt |= 1 << m;
            }
        }
        let full = if k == 4 { u16::MAX } else { (1u16 << (1 << k)) - 1 };
        if tt == 0 {
            b.gate(GateFn::Const0, out, &[]);
            return Ok(());
        }
        if tt == full {
            b.gate(GateFn::Const1, out, &[]);
            return Ok(());
        }
        let direct = GateFn::ALL
            .iter()
            .find(|f| f.arity() == k && f.arity() > 0 && u16::from(f.truth_table()) == tt);
        if let Some(&f) = direct {
            b.gate(f, out, &ins);
            return Ok(());
        }
    }

    let mut fresh = 0usize;
    let mut tmp = |b: &NetlistBuilder| loop {
        let name = format!("{out}__t{fresh}");
        fresh += 1;
        if !b.has_signal(&name) {
            return name;
        }
    };
    let mut cubes = Vec::new();
    for (_, lits, _) in &c.rows {
        let mut terms = Vec::new();
        for (j, &l) in lits.iter().enumerate() {
            match l {
                1 => terms.push(ins[j].to_string()),
                0 => {
                    let n = tmp(b);
                    b.gate(GateFn::Not, &n, &[ins[j]]);
                    terms.push(n);
                }
                _ => {}
            }
        }
        if terms.is_empty() {
            let n = tmp(b);
            b.gate(GateFn::Const1, &n, &[]);
            terms.push(n);
        }
        cubes.push(chain(b, &mut tmp, GateFn::And, terms));
    }
    if cubes.is_empty() {
        b.gate(if offset { GateFn::Const1 } else { GateFn::Const0 }, out, &[]);
        return Ok(());
    }
    let sum = chain(b, &mut tmp, GateFn::Or, cubes);
    b.gate(if offset { GateFn::Not } else { GateFn::Buf }, out, &[&sum]);
    Ok(())
}

fn chain<F: FnMut(&NetlistBuilder) -> String>(
    b: &mut NetlistBuilder,
    tmp: &mut F,
    op: GateFn,
    items: Vec<String>,
) -> String {
    let mut it = items.into_iter();
    let mut acc = it.next().expect("non-empty chain");
    for x in it {
        let n = tmp(b);
        b.gate(op, &n, &[&acc, &x]);
        acc = n;
    }
    acc
}

fn cover_rows(f: GateFn) -> &'static [&'static str] {
    match f {
        GateFn::Const0 => &[],
        GateFn::Const1 => &["1"],
        GateFn::Buf => &["1 1"],
        GateFn::Not => &["0 1"],
        GateFn::And => &["11 1"],
        GateFn::Or => &["1- 1", "-1 1"],
        GateFn::Xor => &["10 1", "01 1"],
        GateFn::Nand => &["0- 1", "-0 1"],
        GateFn::Nor => &["00 1"],
        GateFn::Xnor => &["11 1", "00 1"],
    }
}

pub fn emit_blif(n: &Netlist) -> String {
    let mut s = String::new();
    let _ = writeln!(s, ".model {}", n.name());
    let _ = writeln!(s, ".inputs {}", n.input_names().collect::<Vec<_>>().join(" "));
    let _ = writeln!(s, ".outputs {}", n.output_names().collect::<Vec<_>>().join(" "));
    for g in n.gates() {
        s.push_str(".names");
        for &f in &g.fanins {
            s.push(' ');
            s.push_str(n.signal_name(f));
        }
        s.push(' ');
        s.push_str(n.signal_name(g.output));
        s.push('\n');
        for row in cover_rows(g.func) {
            s.push_str(row);
            s.push('\n');
        }
    }
    s.push_str(".end\n");
    s
}
