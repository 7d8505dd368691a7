//! Free-XOR garbling with point-and-permute.
//!
//! Two AND-gate encodings are available: the classic four-row table and
//! half-gates with two rows. XOR and INV gates cost no ciphertexts.

use rand::RngCore;

use super::label::{self, hash1, hash2, permute_bit, random_delta, random_label, Label};
use super::TwoPcError;
use crate::circuit::{Circuit, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GarbleScheme {
    FourRow,
    HalfGates,
}

impl GarbleScheme {
    pub fn rows(self) -> usize {
        match self {
            GarbleScheme::FourRow => 4,
            GarbleScheme::HalfGates => 2,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            GarbleScheme::FourRow => 4,
            GarbleScheme::HalfGates => 2,
        }
    }
}

impl std::str::FromStr for GarbleScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "four-row" | "4" => Ok(GarbleScheme::FourRow),
            "half-gates" | "2" => Ok(GarbleScheme::HalfGates),
            _ => Err(format!("unknown garbling scheme `{s}` (four-row, half-gates)")),
        }
    }
}

/// What the evaluator receives besides input labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GarbledMaterial {
    pub scheme: GarbleScheme,
    /// `rows` ciphertexts per AND gate, in gate order.
    pub tables: Vec<Label>,
    /// Active labels of constant gates, in gate order.
    pub const_labels: Vec<Label>,
}

impl GarbledMaterial {
    pub fn table_bytes(&self) -> usize {
        self.tables.len() * label::LABEL_BYTES
    }
}

/// Hashed label pairs per output wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeMap(pub Vec<(Label, Label)>);

/// Garbler-side secrets: zero labels of every input and the global offset.
#[derive(Clone, Debug)]
pub struct InputLabels {
    pub zero: Vec<Label>,
    pub delta: Label,
}

impl InputLabels {
    pub fn active(&self, input: usize, value: bool) -> Label {
        self.zero[input] ^ if value { self.delta } else { 0 }
    }

    pub fn pair(&self, input: usize) -> (Label, Label) {
        (self.zero[input], self.zero[input] ^ self.delta)
    }
}

fn output_tweak(i: usize) -> u128 {
    (1u128 << 127) | i as u128
}

fn and_tweak(gate: usize) -> u128 {
    (gate as u128) << 1
}

pub fn garble<R: RngCore + ?Sized>(
    circuit: &Circuit,
    scheme: GarbleScheme,
    rng: &mut R,
) -> (GarbledMaterial, InputLabels, DecodeMap) {
    let delta = random_delta(rng);
    let mut zero = vec![0u128; circuit.num_wires()];
    for z in zero.iter_mut().take(circuit.input_count()) {
        *z = random_label(rng);
    }
    let and_count = circuit.gates().iter().filter(|g| matches!(g, Gate::And { .. })).count();
    let mut tables = Vec::with_capacity(and_count * scheme.rows());
    let mut const_labels = Vec::new();
    for (gid, g) in circuit.gates().iter().enumerate() {
        match *g {
            Gate::Xor { a, b, out } => zero[out.index()] = zero[a.index()] ^ zero[b.index()],
            Gate::Inv { a, out } => zero[out.index()] = zero[a.index()] ^ delta,
            Gate::Const { value, out } => {
                let l = random_label(rng);
                zero[out.index()] = l;
                const_labels.push(if value { l ^ delta } else { l });
            }
            Gate::And { a, b, out } => {
                let (a0, b0) = (zero[a.index()], zero[b.index()]);
                zero[out.index()] = match scheme {
                    GarbleScheme::FourRow => garble_four_row(a0, b0, delta, gid, rng, &mut tables),
                    GarbleScheme::HalfGates => garble_half(a0, b0, delta, gid, &mut tables),
                };
            }
        }
    }
    let decode = DecodeMap(
        circuit
            .outputs()
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let l0 = zero[w.index()];
                (hash1(l0, output_tweak(i)), hash1(l0 ^ delta, output_tweak(i)))
            })
            .collect(),
    );
    zero.truncate(circuit.input_count());
    (GarbledMaterial { scheme, tables, const_labels }, InputLabels { zero, delta }, decode)
}

fn garble_four_row<R: RngCore + ?Sized>(
    a0: Label,
    b0: Label,
    delta: Label,
    gid: usize,
    rng: &mut R,
    tables: &mut Vec<Label>,
) -> Label {
    let c0 = random_label(rng);
    let (pa, pb) = (permute_bit(a0) as usize, permute_bit(b0) as usize);
    let mut rows = [0u128; 4];
    for i in 0..2 {
        for j in 0..2 {
            let la = a0 ^ if i == 1 { delta } else { 0 };
            let lb = b0 ^ if j == 1 { delta } else { 0 };
            let c = c0 ^ if i & j == 1 { delta } else { 0 };
            rows[2 * (pa ^ i) + (pb ^ j)] = hash2(la, lb, gid as u128) ^ c;
        }
    }
    tables.extend_from_slice(&rows);
    c0
}

fn garble_half(a0: Label, b0: Label, delta: Label, gid: usize, tables: &mut Vec<Label>) -> Label {
    let (pa, pb) = (permute_bit(a0), permute_bit(b0));
    let (j0, j1) = (and_tweak(gid), and_tweak(gid) | 1);
    let (a1, b1) = (a0 ^ delta, b0 ^ delta);
    let (ha0, ha1) = (hash1(a0, j0), hash1(a1, j0));
    let (hb0, hb1) = (hash1(b0, j1), hash1(b1, j1));
    let tg = ha0 ^ ha1 ^ if pb { delta } else { 0 };
    let wg0 = ha0 ^ if pa { tg } else { 0 };
    let te = hb0 ^ hb1 ^ a0;
    let we0 = hb0 ^ if pb { te ^ a0 } else { 0 };
    tables.push(tg);
    tables.push(te);
    wg0 ^ we0
}

/// Evaluates with one label per input wire; returns the output labels.
pub fn evaluate(circuit: &Circuit, material: &GarbledMaterial, inputs: &[Label]) -> Result<Vec<Label>, TwoPcError> {
    if inputs.len() != circuit.input_count() {
        return Err(TwoPcError::ProtocolViolation(format!(
            "{} input labels for {} inputs",
            inputs.len(),
            circuit.input_count()
        )));
    }
    let rows = material.scheme.rows();
    let and_count = circuit.gates().iter().filter(|g| matches!(g, Gate::And { .. })).count();
    if material.tables.len() != and_count * rows {
        return Err(TwoPcError::ProtocolViolation(format!(
            "{} table rows for {and_count} AND gates",
            material.tables.len()
        )));
    }
    let consts = circuit.gates().iter().filter(|g| matches!(g, Gate::Const { .. })).count();
    if material.const_labels.len() != consts {
        return Err(TwoPcError::ProtocolViolation("constant label count".into()));
    }
    let mut w = vec![0u128; circuit.num_wires()];
    w[..inputs.len()].copy_from_slice(inputs);
    let mut tables = material.tables.chunks_exact(rows);
    let mut const_labels = material.const_labels.iter();
    for (gid, g) in circuit.gates().iter().enumerate() {
        match *g {
            Gate::Xor { a, b, out } => w[out.index()] = w[a.index()] ^ w[b.index()],
            Gate::Inv { a, out } => w[out.index()] = w[a.index()],
            Gate::Const { out, .. } => w[out.index()] = *const_labels.next().unwrap(),
            Gate::And { a, b, out } => {
                let (la, lb) = (w[a.index()], w[b.index()]);
                let t = tables.next().unwrap();
                w[out.index()] = match material.scheme {
                    GarbleScheme::FourRow => {
                        let row = 2 * permute_bit(la) as usize + permute_bit(lb) as usize;
                        t[row] ^ hash2(la, lb, gid as u128)
                    }
                    GarbleScheme::HalfGates => {
                        let (j0, j1) = (and_tweak(gid), and_tweak(gid) | 1);
                        let wg = hash1(la, j0) ^ if permute_bit(la) { t[0] } else { 0 };
                        let we = hash1(lb, j1) ^ if permute_bit(lb) { t[1] ^ la } else { 0 };
                        wg ^ we
                    }
                };
            }
        }
    }
    Ok(circuit.outputs().iter().map(|o| w[o.index()]).collect())
}

/// Maps output labels to bits. A label matching neither entry means the
/// material or labels were corrupted.
pub fn decode(outputs: &[Label], map: &DecodeMap) -> Result<Vec<bool>, TwoPcError> {
    if outputs.len() != map.0.len() {
        return Err(TwoPcError::ProtocolViolation("output count differs from decode map".into()));
    }
    outputs
        .iter()
        .zip(&map.0)
        .enumerate()
        .map(|(i, (&l, &(h0, h1)))| {
            let h = hash1(l, output_tweak(i));
            if h == h0 {
                Ok(false)
            } else if h == h1 {
                Ok(true)
            } else {
                Err(TwoPcError::DecodeFailure { output: i })
            }
        })
        .collect()
}

impl DecodeMap {
    pub fn to_bytes(&self) -> Vec<u8> {
        label::labels_to_bytes(&self.0.iter().flat_map(|&(a, b)| [a, b]).collect::<Vec<_>>())
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<DecodeMap> {
        let ls = label::labels_from_bytes(bytes)?;
        if ls.len() % 2 != 0 {
            return None;
        }
        Some(DecodeMap(ls.chunks_exact(2).map(|p| (p[0], p[1])).collect()))
    }
}
