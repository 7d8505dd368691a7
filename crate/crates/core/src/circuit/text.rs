//! Line-oriented text format.
//!
//! ```text
//! CIRC v1 <p1_inputs> <p2_inputs> <n_outputs>
//! XOR a b -> c
//! AND a b -> c
//! INV a -> c
//! CONST0 -> c
//! CONST1 -> c
//! OUT o1 o2 ...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Words inside the
//! circuits produced by this crate are laid out most-significant bit first.

use std::fmt::{self, Write};
use std::str::FromStr;

use super::{Circuit, CircuitError, Gate, GateKind, WireId};

pub(super) fn write_to<W: Write>(c: &Circuit, w: &mut W) -> fmt::Result {
    writeln!(w, "CIRC v1 {} {} {}", c.p1_inputs, c.p2_inputs, c.outputs.len())?;
    for g in &c.gates {
        match *g {
            Gate::Xor { a, b, out } => writeln!(w, "XOR {a} {b} -> {out}")?,
            Gate::And { a, b, out } => writeln!(w, "AND {a} {b} -> {out}")?,
            Gate::Inv { a, out } => writeln!(w, "INV {a} -> {out}")?,
            Gate::Const { value, out } => writeln!(w, "CONST{} -> {out}", value as u8)?,
        }
    }
    w.write_str("OUT")?;
    for o in &c.outputs {
        write!(w, " {o}")?;
    }
    w.write_char('\n')
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_to(self, f)
    }
}

impl Circuit {
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Circuit, CircuitError> {
        text.parse()
    }
}

fn err(line: usize, msg: impl Into<String>) -> CircuitError {
    CircuitError::Parse { line, msg: msg.into() }
}

fn parse_num(line: usize, tok: &str) -> Result<usize, CircuitError> {
    tok.parse::<u32>()
        .map(|v| v as usize)
        .map_err(|_| err(line, format!("expected a wire index, found `{tok}`")))
}

impl FromStr for Circuit {
    type Err = CircuitError;

    fn from_str(text: &str) -> Result<Circuit, CircuitError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or_else(|| err(1, "missing CIRC header"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "CIRC" || h[1] != "v1" {
            return Err(err(hline, "header must be `CIRC v1 <p1> <p2> <outputs>`"));
        }
        let p1 = parse_num(hline, h[2])?;
        let p2 = parse_num(hline, h[3])?;
        let n_out = parse_num(hline, h[4])?;

        let mut defined = vec![true; p1 + p2];
        let is_defined = |d: &Vec<bool>, w: usize| d.get(w).copied().unwrap_or(false);
        let mut gates = Vec::new();
        let mut outputs = None;

        for (ln, line) in lines {
            if outputs.is_some() {
                return Err(err(ln, "content after OUT line"));
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks[0] == "OUT" {
                let mut outs = Vec::with_capacity(toks.len() - 1);
                for t in &toks[1..] {
                    let w = parse_num(ln, t)?;
                    if !is_defined(&defined, w) {
                        return Err(err(ln, format!("output wire {w} is not defined")));
                    }
                    outs.push(WireId(w as u32));
                }
                if outs.len() != n_out {
                    return Err(err(ln, format!("header declares {n_out} outputs, OUT lists {}", outs.len())));
                }
                outputs = Some(outs);
                continue;
            }
            let kind = match toks[0] {
                "XOR" => GateKind::Xor,
                "AND" => GateKind::And,
                "INV" => GateKind::Inv,
                "CONST0" => GateKind::Const0,
                "CONST1" => GateKind::Const1,
                other => return Err(err(ln, format!("unknown gate `{other}`"))),
            };
            let arity = kind.arity();
            if toks.len() != arity + 3 || toks[arity + 1] != "->" {
                return Err(err(ln, format!("malformed {kind} line")));
            }
            let mut ins = Vec::with_capacity(arity);
            for t in &toks[1..=arity] {
                let w = parse_num(ln, t)?;
                if !is_defined(&defined, w) {
                    return Err(err(ln, format!("wire {w} used before definition")));
                }
                ins.push(WireId(w as u32));
            }
            let out = parse_num(ln, toks[arity + 2])?;
            if is_defined(&defined, out) {
                return Err(err(ln, format!("wire {out} is written twice")));
            }
            if defined.len() <= out {
                defined.resize(out + 1, false);
            }
            defined[out] = true;
            gates.push(Gate::from_parts(kind, &ins, WireId(out as u32)).map_err(|e| err(ln, e.to_string()))?);
        }
        let outputs = outputs.ok_or_else(|| err(text.lines().count().max(1), "missing OUT line"))?;
        Circuit::new(p1, p2, gates, outputs)
    }
}
