use std::sync::Arc;
use std::thread;

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::channel::{Channel, CommStats, MsgType, Phase};
use super::garble::{decode, evaluate, garble, DecodeMap, GarbleScheme, GarbledMaterial};
use super::label::{labels_from_bytes, labels_to_bytes, Label};
use super::ot::{ot_receive, ot_send, OtMode};
use super::TwoPcError;
use crate::bits;
use crate::circuit::{Circuit, Gate};

pub const PROTOCOL_VERSION: u16 = 1;
const LABELS_PER_FRAME: usize = 1 << 16;

/// Which computing party this end of a session is. P1 garbles, P2 evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Garbler,
    Evaluator,
}

impl Side {
    fn code(self) -> u8 {
        match self {
            Side::Garbler => 1,
            Side::Evaluator => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionParams {
    pub scheme: GarbleScheme,
    pub ot: OtMode,
    pub allow_insecure_ot: bool,
    pub kappa: u32,
    /// Bin this session evaluates (0 for single-circuit modes).
    pub bin: u32,
}

impl Default for SessionParams {
    fn default() -> Self {
        SessionParams { scheme: GarbleScheme::FourRow, ot: OtMode::Base, allow_insecure_ot: false, kappa: 128, bin: 0 }
    }
}

/// HELLO payload: version, κ, role code, bin id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hello {
    pub version: u16,
    pub kappa: u16,
    pub role: u8,
    pub bin: u32,
}

impl Hello {
    pub fn encode(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(9);
        v.extend_from_slice(&self.version.to_be_bytes());
        v.extend_from_slice(&self.kappa.to_be_bytes());
        v.push(self.role);
        v.extend_from_slice(&self.bin.to_be_bytes());
        v
    }

    pub fn decode(b: &[u8]) -> Result<Hello, TwoPcError> {
        if b.len() != 9 {
            return Err(TwoPcError::ProtocolViolation(format!("HELLO of {} bytes", b.len())));
        }
        Ok(Hello {
            version: u16::from_be_bytes([b[0], b[1]]),
            kappa: u16::from_be_bytes([b[2], b[3]]),
            role: b[4],
            bin: u32::from_be_bytes(b[5..9].try_into().unwrap()),
        })
    }
}

/// Reads the peer's HELLO, e.g. to learn which bin an incoming connection is for.
pub fn read_hello(ch: &mut Channel) -> Result<Hello, TwoPcError> {
    ch.set_phase(Phase::Control);
    Hello::decode(&ch.recv_expect(MsgType::Hello)?)
}

fn handshake(
    side: Side,
    circuit: &Circuit,
    params: &SessionParams,
    ch: &mut Channel,
    peer: Option<Hello>,
) -> Result<(), TwoPcError> {
    ch.set_phase(Phase::Control);
    let ours = Hello { version: PROTOCOL_VERSION, kappa: params.kappa as u16, role: side.code(), bin: params.bin };
    ch.send(MsgType::Hello, &ours.encode())?;
    let theirs = match peer {
        Some(h) => h,
        None => read_hello(ch)?,
    };
    let expected_role = 3 - side.code();
    if theirs.version != ours.version || theirs.kappa != ours.kappa || theirs.role != expected_role || theirs.bin != ours.bin {
        return Err(TwoPcError::HandshakeMismatch(format!("peer hello {theirs:?} does not pair with {ours:?}")));
    }
    let mut digest = circuit.fingerprint().to_vec();
    digest.push(params.scheme.code());
    digest.push(params.ot.code());
    ch.send(MsgType::CircHash, &digest)?;
    if ch.recv_expect(MsgType::CircHash)? != digest {
        return Err(TwoPcError::HandshakeMismatch("circuit hash or session parameters differ".into()));
    }
    Ok(())
}

fn and_count(circuit: &Circuit) -> usize {
    circuit.gates().iter().filter(|g| matches!(g, Gate::And { .. })).count()
}

fn send_labels_chunked(ch: &mut Channel, ty: MsgType, labels: &[Label]) -> Result<(), TwoPcError> {
    for chunk in labels.chunks(LABELS_PER_FRAME) {
        ch.send(ty, &labels_to_bytes(chunk))?;
    }
    Ok(())
}

fn recv_labels_chunked(ch: &mut Channel, ty: MsgType, count: usize) -> Result<Vec<Label>, TwoPcError> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let part = labels_from_bytes(&ch.recv_expect(ty)?)
            .ok_or_else(|| TwoPcError::ProtocolViolation("ragged label frame".into()))?;
        if out.len() + part.len() > count {
            return Err(TwoPcError::ProtocolViolation("too many labels".into()));
        }
        out.extend(part);
    }
    Ok(out)
}

/// Runs one garbled-circuit session. Both sides learn the output bits.
///
/// Message order: handshake, OT for the evaluator's input labels, AND
/// tables, garbler input labels with constant labels and the decode map,
/// then the decoded output returned by the evaluator.
pub fn run_session<R: RngCore + CryptoRng>(
    side: Side,
    circuit: &Circuit,
    inputs: &[bool],
    params: &SessionParams,
    ch: &mut Channel,
    rng: &mut R,
) -> Result<(Vec<bool>, CommStats), TwoPcError> {
    session_inner(side, circuit, inputs, params, ch, rng, None)
}

/// [`run_session`] for a connection whose peer HELLO was already read.
pub fn run_session_with_hello<R: RngCore + CryptoRng>(
    side: Side,
    circuit: &Circuit,
    inputs: &[bool],
    params: &SessionParams,
    ch: &mut Channel,
    rng: &mut R,
    peer: Hello,
) -> Result<(Vec<bool>, CommStats), TwoPcError> {
    session_inner(side, circuit, inputs, params, ch, rng, Some(peer))
}

fn session_inner<R: RngCore + CryptoRng>(
    side: Side,
    circuit: &Circuit,
    inputs: &[bool],
    params: &SessionParams,
    ch: &mut Channel,
    rng: &mut R,
    peer: Option<Hello>,
) -> Result<(Vec<bool>, CommStats), TwoPcError> {
    if params.ot == OtMode::Insecure && !params.allow_insecure_ot {
        return Err(TwoPcError::InsecureOtRefused);
    }
    if params.kappa != 128 {
        return Err(TwoPcError::ProtocolViolation(format!("κ = {} is unsupported", params.kappa)));
    }
    let own = match side {
        Side::Garbler => circuit.p1_inputs(),
        Side::Evaluator => circuit.p2_inputs(),
    };
    if inputs.len() != own {
        return Err(crate::circuit::CircuitError::InputLengthMismatch { expected: own, got: inputs.len() }.into());
    }
    let start = *ch.stats();
    handshake(side, circuit, params, ch, peer)?;
    let rows = params.scheme.rows();
    let outputs = match side {
        Side::Garbler => {
            let (mat, labels, map) = garble(circuit, params.scheme, rng);
            ch.set_phase(Phase::Ot);
            let pairs: Vec<_> = circuit.p2_range().map(|i| labels.pair(i)).collect();
            ot_send(ch, &pairs, params.ot, rng)?;
            ch.set_phase(Phase::Tables);
            send_labels_chunked(ch, MsgType::Tables, &mat.tables)?;
            ch.set_phase(Phase::Labels);
            let active: Vec<Label> = inputs.iter().enumerate().map(|(i, &v)| labels.active(i, v)).collect();
            ch.send(MsgType::Labels, &labels_to_bytes(&active))?;
            ch.send(MsgType::Labels, &labels_to_bytes(&mat.const_labels))?;
            ch.send(MsgType::Labels, &map.to_bytes())?;
            ch.set_phase(Phase::Output);
            let packed = ch.recv_expect(MsgType::Output)?;
            if packed.len() != circuit.outputs().len().div_ceil(8) {
                return Err(TwoPcError::ProtocolViolation("output length".into()));
            }
            bits::unpack_bytes(&packed, circuit.outputs().len())
        }
        Side::Evaluator => {
            ch.set_phase(Phase::Ot);
            let own_labels = ot_receive(ch, inputs, params.ot, rng)?;
            ch.set_phase(Phase::Tables);
            let tables = recv_labels_chunked(ch, MsgType::Tables, and_count(circuit) * rows)?;
            ch.set_phase(Phase::Labels);
            let garbler_labels = labels_from_bytes(&ch.recv_expect(MsgType::Labels)?)
                .ok_or_else(|| TwoPcError::ProtocolViolation("label frame".into()))?;
            let const_labels = labels_from_bytes(&ch.recv_expect(MsgType::Labels)?)
                .ok_or_else(|| TwoPcError::ProtocolViolation("constant label frame".into()))?;
            let map = DecodeMap::from_bytes(&ch.recv_expect(MsgType::Labels)?)
                .ok_or_else(|| TwoPcError::ProtocolViolation("decode map frame".into()))?;
            if garbler_labels.len() != circuit.p1_inputs() {
                return Err(TwoPcError::ProtocolViolation("garbler label count".into()));
            }
            let mut all = garbler_labels;
            all.extend(own_labels);
            let mat = GarbledMaterial { scheme: params.scheme, tables, const_labels };
            let out = decode(&evaluate(circuit, &mat, &all)?, &map)?;
            ch.set_phase(Phase::Output);
            ch.send(MsgType::Output, &bits::pack_bytes(&out))?;
            ch.flush()?;
            out
        }
    };
    ch.set_phase(Phase::Control);
    let mut stats = *ch.stats();
    stats.rows_per_and = rows as u32;
    Ok((outputs, diff(&stats, &start)))
}

fn diff(after: &CommStats, before: &CommStats) -> CommStats {
    let mut d = *after;
    for (a, b) in [
        (&mut d.control, before.control),
        (&mut d.ot, before.ot),
        (&mut d.tables, before.tables),
        (&mut d.labels, before.labels),
        (&mut d.output, before.output),
    ] {
        a.sent -= b.sent;
        a.received -= b.received;
    }
    d
}

/// Reference backend: evaluates the circuit on the joint input in the clear.
pub fn cleartext_session(circuit: &Circuit, joint_inputs: &[bool]) -> Result<Vec<bool>, TwoPcError> {
    Ok(circuit.eval_plaintext(joint_inputs)?)
}

/// Both sides of a session over a fresh TCP loopback connection.
/// Returns the output and each side's statistics (garbler, evaluator).
pub fn run_loopback(
    circuit: Arc<Circuit>,
    p1_inputs: Vec<bool>,
    p2_inputs: Vec<bool>,
    params: SessionParams,
    seed: u64,
) -> Result<(Vec<bool>, CommStats, CommStats), TwoPcError> {
    let (mut a, mut b) = Channel::loopback_pair()?;
    let c2 = circuit.clone();
    let evaluator = thread::spawn(move || {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xe7a1_0000_0000_0002);
        let r = run_session(Side::Evaluator, &c2, &p2_inputs, &params, &mut b, &mut rng);
        if r.is_err() {
            b.send_abort("evaluator failed");
        }
        r
    });
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9a3b_0000_0000_0001);
    let garbled = run_session(Side::Garbler, &circuit, &p1_inputs, &params, &mut a, &mut rng);
    if garbled.is_err() {
        a.send_abort("garbler failed");
    }
    let evaluated = evaluator.join().expect("evaluator thread panicked");
    let (out1, s1) = garbled?;
    let (out2, s2) = evaluated?;
    if out1 != out2 {
        return Err(TwoPcError::ProtocolViolation("parties disagree on the output".into()));
    }
    Ok((out1, s1, s2))
}
