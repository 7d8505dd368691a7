use super::{Circuit, CircuitError, CircuitStats, Gate, GateKind, WireId};

/// Destination for emitted gates.
///
/// Generators are written against this trait so the same code can either
/// record a full [`Circuit`] or only tally gate counts for configurations
/// too large to materialize. Wires handed to a sink must come from that sink.
pub trait GateSink {
    fn xor(&mut self, a: WireId, b: WireId) -> WireId;
    fn and(&mut self, a: WireId, b: WireId) -> WireId;
    fn inv(&mut self, a: WireId) -> WireId;
    /// Constant wire. Each value is emitted at most once per sink.
    fn constant(&mut self, value: bool) -> WireId;

    /// `!( !a & !b )`: one AND gate.
    fn or(&mut self, a: WireId, b: WireId) -> WireId {
        let na = self.inv(a);
        let nb = self.inv(b);
        let both = self.and(na, nb);
        self.inv(both)
    }
}

/// Incrementally builds a [`Circuit`]. Fresh wires are numbered sequentially
/// after the input wires.
#[derive(Debug)]
pub struct CircuitBuilder {
    p1_inputs: usize,
    p2_inputs: usize,
    next: u32,
    gates: Vec<Gate>,
    consts: [Option<WireId>; 2],
}

impl CircuitBuilder {
    pub fn new(p1_inputs: usize, p2_inputs: usize) -> Self {
        CircuitBuilder {
            p1_inputs,
            p2_inputs,
            next: (p1_inputs + p2_inputs) as u32,
            gates: Vec::new(),
            consts: [None, None],
        }
    }

    /// Input wire by global index (P1 segment first).
    pub fn input(&self, i: usize) -> WireId {
        assert!(i < self.p1_inputs + self.p2_inputs, "input {i} out of range");
        WireId(i as u32)
    }

    pub fn p1_input(&self, i: usize) -> WireId {
        assert!(i < self.p1_inputs, "P1 input {i} out of range");
        WireId(i as u32)
    }

    pub fn p2_input(&self, i: usize) -> WireId {
        assert!(i < self.p2_inputs, "P2 input {i} out of range");
        WireId((self.p1_inputs + i) as u32)
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Checked gate insertion.
    pub fn add_gate(&mut self, kind: GateKind, inputs: &[WireId]) -> Result<WireId, CircuitError> {
        let out = WireId(self.next);
        let gate = Gate::from_parts(kind, inputs, out)?;
        if let Some(&wire) = inputs.iter().find(|w| w.0 >= self.next) {
            return Err(CircuitError::UndefinedWire { wire });
        }
        self.gates.push(gate);
        self.next += 1;
        Ok(out)
    }

    fn push(&mut self, kind: GateKind, inputs: &[WireId]) -> WireId {
        self.add_gate(kind, inputs)
            .unwrap_or_else(|e| panic!("generator emitted an invalid gate: {e}"))
    }

    pub fn finish(self, outputs: Vec<WireId>) -> Result<Circuit, CircuitError> {
        Circuit::new(self.p1_inputs, self.p2_inputs, self.gates, outputs)
    }
}

impl GateSink for CircuitBuilder {
    fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        self.push(GateKind::Xor, &[a, b])
    }

    fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.push(GateKind::And, &[a, b])
    }

    fn inv(&mut self, a: WireId) -> WireId {
        self.push(GateKind::Inv, &[a])
    }

    fn constant(&mut self, value: bool) -> WireId {
        if let Some(w) = self.consts[value as usize] {
            return w;
        }
        let kind = if value { GateKind::Const1 } else { GateKind::Const0 };
        let w = self.push(kind, &[]);
        self.consts[value as usize] = Some(w);
        w
    }
}

/// A sink that only counts gates. AND-depth is not tracked.
#[derive(Debug, Default)]
pub struct GateCounter {
    next: u64,
    stats: CircuitStats,
    consts: [Option<WireId>; 2],
}

impl GateCounter {
    pub fn new(inputs: usize) -> Self {
        GateCounter { next: inputs as u64, ..Default::default() }
    }

    pub fn input(&self, i: usize) -> WireId {
        WireId(i as u32)
    }

    pub fn stats(&self) -> CircuitStats {
        self.stats
    }

    fn fresh(&mut self, kind: GateKind) -> WireId {
        self.stats.record(kind);
        self.next += 1;
        // Ids wrap for very large counts; nothing dereferences them.
        WireId(self.next as u32)
    }
}

impl GateSink for GateCounter {
    fn xor(&mut self, _: WireId, _: WireId) -> WireId {
        self.fresh(GateKind::Xor)
    }

    fn and(&mut self, _: WireId, _: WireId) -> WireId {
        self.fresh(GateKind::And)
    }

    fn inv(&mut self, _: WireId) -> WireId {
        self.fresh(GateKind::Inv)
    }

    fn constant(&mut self, value: bool) -> WireId {
        if let Some(w) = self.consts[value as usize] {
            return w;
        }
        let w = self.fresh(if value { GateKind::Const1 } else { GateKind::Const0 });
        self.consts[value as usize] = Some(w);
        w
    }
}
