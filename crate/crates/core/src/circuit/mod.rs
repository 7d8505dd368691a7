//! Boolean circuit representation.
//!
//! A [`Circuit`] is a topologically ordered list of [`Gate`]s over a single
//! wire namespace. Wires `0..p1_inputs` belong to the generator (P1), the
//! next `p2_inputs` wires to the evaluator (P2); every other wire is the
//! output of exactly one gate. XOR and INV gates are free under free-XOR
//! garbling, AND gates are not.

mod builder;
mod text;

pub use builder::{CircuitBuilder, GateCounter, GateSink};

use std::fmt;
use std::ops::Range;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Index into the global wire namespace of a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireId(pub u32);

impl WireId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for WireId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Xor,
    And,
    Inv,
    Const0,
    Const1,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Xor | GateKind::And => 2,
            GateKind::Inv => 1,
            GateKind::Const0 | GateKind::Const1 => 0,
        }
    }

    pub fn is_free(self) -> bool {
        self != GateKind::And
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Xor => "XOR",
            GateKind::And => "AND",
            GateKind::Inv => "INV",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Xor { a: WireId, b: WireId, out: WireId },
    And { a: WireId, b: WireId, out: WireId },
    Inv { a: WireId, out: WireId },
    Const { value: bool, out: WireId },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Xor { .. } => GateKind::Xor,
            Gate::And { .. } => GateKind::And,
            Gate::Inv { .. } => GateKind::Inv,
            Gate::Const { value: false, .. } => GateKind::Const0,
            Gate::Const { value: true, .. } => GateKind::Const1,
        }
    }

    pub fn output(&self) -> WireId {
        match *self {
            Gate::Xor { out, .. } | Gate::And { out, .. } | Gate::Inv { out, .. } => out,
            Gate::Const { out, .. } => out,
        }
    }

    /// Input wires in positional order.
    pub fn inputs(&self) -> impl Iterator<Item = WireId> {
        let (a, b) = match *self {
            Gate::Xor { a, b, .. } | Gate::And { a, b, .. } => (Some(a), Some(b)),
            Gate::Inv { a, .. } => (Some(a), None),
            Gate::Const { .. } => (None, None),
        };
        a.into_iter().chain(b)
    }

    pub(crate) fn from_parts(
        kind: GateKind,
        inputs: &[WireId],
        out: WireId,
    ) -> Result<Gate, CircuitError> {
        if inputs.len() != kind.arity() {
            return Err(CircuitError::ArityMismatch {
                kind,
                expected: kind.arity(),
                got: inputs.len(),
            });
        }
        Ok(match kind {
            GateKind::Xor => Gate::Xor { a: inputs[0], b: inputs[1], out },
            GateKind::And => Gate::And { a: inputs[0], b: inputs[1], out },
            GateKind::Inv => Gate::Inv { a: inputs[0], out },
            GateKind::Const0 => Gate::Const { value: false, out },
            GateKind::Const1 => Gate::Const { value: true, out },
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("wire {wire} used before it is defined")]
    UndefinedWire { wire: WireId },
    #[error("{kind} takes {expected} inputs, got {got}")]
    ArityMismatch { kind: GateKind, expected: usize, got: usize },
    #[error("wire {wire} is written more than once")]
    WireRedefined { wire: WireId },
    #[error("expected {expected} input bits, got {got}")]
    InputLengthMismatch { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Gate census of a circuit. `depth` counts AND gates only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CircuitStats {
    pub and_count: u64,
    pub xor_count: u64,
    pub inv_count: u64,
    pub const_count: u64,
    pub depth: u32,
}

impl CircuitStats {
    pub fn total(&self) -> u64 {
        self.and_count + self.xor_count + self.inv_count + self.const_count
    }

    pub(crate) fn record(&mut self, kind: GateKind) {
        match kind {
            GateKind::Xor => self.xor_count += 1,
            GateKind::And => self.and_count += 1,
            GateKind::Inv => self.inv_count += 1,
            GateKind::Const0 | GateKind::Const1 => self.const_count += 1,
        }
    }
}

/// An immutable, validated boolean circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    p1_inputs: usize,
    p2_inputs: usize,
    num_wires: usize,
    gates: Vec<Gate>,
    outputs: Vec<WireId>,
}

impl Circuit {
    /// Validates topological order and single assignment, then builds the circuit.
    pub fn new(
        p1_inputs: usize,
        p2_inputs: usize,
        gates: Vec<Gate>,
        outputs: Vec<WireId>,
    ) -> Result<Circuit, CircuitError> {
        let n_inputs = p1_inputs + p2_inputs;
        let mut num_wires = n_inputs;
        for g in &gates {
            num_wires = num_wires.max(g.output().index() + 1);
        }
        let mut defined = vec![false; num_wires];
        defined[..n_inputs].iter_mut().for_each(|d| *d = true);
        for g in &gates {
            for w in g.inputs() {
                if !defined.get(w.index()).copied().unwrap_or(false) {
                    return Err(CircuitError::UndefinedWire { wire: w });
                }
            }
            let out = g.output();
            if defined[out.index()] {
                return Err(CircuitError::WireRedefined { wire: out });
            }
            defined[out.index()] = true;
        }
        for &w in &outputs {
            if !defined.get(w.index()).copied().unwrap_or(false) {
                return Err(CircuitError::UndefinedWire { wire: w });
            }
        }
        Ok(Circuit { p1_inputs, p2_inputs, num_wires, gates, outputs })
    }

    pub fn p1_inputs(&self) -> usize {
        self.p1_inputs
    }

    pub fn p2_inputs(&self) -> usize {
        self.p2_inputs
    }

    pub fn input_count(&self) -> usize {
        self.p1_inputs + self.p2_inputs
    }

    pub fn p1_range(&self) -> Range<usize> {
        0..self.p1_inputs
    }

    pub fn p2_range(&self) -> Range<usize> {
        self.p1_inputs..self.p1_inputs + self.p2_inputs
    }

    /// One past the largest wire index in use.
    pub fn num_wires(&self) -> usize {
        self.num_wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    /// Evaluates the circuit in the clear. `inputs` holds P1's segment followed by P2's.
    pub fn eval_plaintext(&self, inputs: &[bool]) -> Result<Vec<bool>, CircuitError> {
        if inputs.len() != self.input_count() {
            return Err(CircuitError::InputLengthMismatch {
                expected: self.input_count(),
                got: inputs.len(),
            });
        }
        let mut wires = vec![false; self.num_wires];
        wires[..inputs.len()].copy_from_slice(inputs);
        for g in &self.gates {
            match *g {
                Gate::Xor { a, b, out } => wires[out.index()] = wires[a.index()] ^ wires[b.index()],
                Gate::And { a, b, out } => wires[out.index()] = wires[a.index()] & wires[b.index()],
                Gate::Inv { a, out } => wires[out.index()] = !wires[a.index()],
                Gate::Const { value, out } => wires[out.index()] = value,
            }
        }
        Ok(self.outputs.iter().map(|w| wires[w.index()]).collect())
    }

    pub fn stats(&self) -> CircuitStats {
        let mut stats = CircuitStats::default();
        let mut depth = vec![0u32; self.num_wires];
        for g in &self.gates {
            stats.record(g.kind());
            let d = g.inputs().map(|w| depth[w.index()]).max().unwrap_or(0);
            let d = if g.kind() == GateKind::And { d + 1 } else { d };
            depth[g.output().index()] = d;
            stats.depth = stats.depth.max(d);
        }
        stats
    }

    /// SHA-256 of the text serialization; both computing parties compare it
    /// before any secret data is exchanged.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        text::write_to(self, &mut HashWriter(&mut hasher)).expect("hashing never fails");
        hasher.finalize().into()
    }
}

struct HashWriter<'a>(&'a mut Sha256);

impl fmt::Write for HashWriter<'_> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.0.update(s.as_bytes());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_circuit() -> Circuit {
        let mut b = CircuitBuilder::new(1, 1);
        let out = b.xor(b.input(0), b.input(1));
        b.finish(vec![out]).unwrap()
    }

    #[test]
    fn first_gate_gets_first_fresh_wire() {
        let mut b = CircuitBuilder::new(1, 1);
        let w = b.add_gate(GateKind::Xor, &[WireId(0), WireId(1)]).unwrap();
        assert_eq!(w, WireId(2));
    }

    #[test]
    fn arity_and_definition_are_checked() {
        let mut b = CircuitBuilder::new(6, 0);
        assert_eq!(
            b.add_gate(GateKind::Inv, &[WireId(0), WireId(1)]),
            Err(CircuitError::ArityMismatch { kind: GateKind::Inv, expected: 1, got: 2 })
        );
        assert_eq!(
            b.add_gate(GateKind::And, &[WireId(5), WireId(6)]),
            Err(CircuitError::UndefinedWire { wire: WireId(6) })
        );
    }

    #[test]
    fn plaintext_xor_and() {
        assert_eq!(xor_circuit().eval_plaintext(&[true, true]).unwrap(), vec![false]);
        let mut b = CircuitBuilder::new(1, 1);
        let out = b.and(b.input(0), b.input(1));
        let c = b.finish(vec![out]).unwrap();
        assert_eq!(c.eval_plaintext(&[true, false]).unwrap(), vec![false]);
        assert_eq!(c.eval_plaintext(&[true, true]).unwrap(), vec![true]);
    }

    #[test]
    fn input_length_is_checked() {
        assert_eq!(
            xor_circuit().eval_plaintext(&[true]),
            Err(CircuitError::InputLengthMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn xor_only_circuit_has_no_ands() {
        let mut b = CircuitBuilder::new(3, 0);
        let x = b.xor(b.input(0), b.input(1));
        let y = b.xor(x, b.input(2));
        let s = b.finish(vec![y]).unwrap().stats();
        assert_eq!(s.and_count, 0);
        assert_eq!(s.xor_count, 2);
        assert_eq!(s.depth, 0);
    }

    #[test]
    fn depth_counts_and_gates_only() {
        let mut b = CircuitBuilder::new(2, 0);
        let (x, y) = (b.input(0), b.input(1));
        let a1 = b.and(x, y);
        let n = b.inv(a1);
        let a2 = b.and(n, x);
        let s = b.finish(vec![a2]).unwrap().stats();
        assert_eq!(s.depth, 2);
        assert_eq!(s.total(), 3);
    }

    #[test]
    fn rejects_double_assignment() {
        let gates = vec![
            Gate::Xor { a: WireId(0), b: WireId(1), out: WireId(2) },
            Gate::And { a: WireId(0), b: WireId(1), out: WireId(2) },
        ];
        assert_eq!(
            Circuit::new(2, 0, gates, vec![]),
            Err(CircuitError::WireRedefined { wire: WireId(2) })
        );
        let gates = vec![Gate::Inv { a: WireId(0), out: WireId(1) }];
        assert_eq!(
            Circuit::new(2, 0, gates, vec![]),
            Err(CircuitError::WireRedefined { wire: WireId(1) })
        );
    }

    #[test]
    fn fingerprint_distinguishes_circuits() {
        let mut b = CircuitBuilder::new(1, 1);
        let out = b.and(b.input(0), b.input(1));
        let and = b.finish(vec![out]).unwrap();
        assert_ne!(and.fingerprint(), xor_circuit().fingerprint());
        assert_eq!(xor_circuit().fingerprint(), xor_circuit().fingerprint());
    }
}
