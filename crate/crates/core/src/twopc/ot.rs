//! 1-out-of-2 oblivious transfer of 128-bit strings.
//!
//! `Base` is the Chou-Orlandi "simplest OT" over the Ristretto group, one
//! public-key exchange per transfer. `Extension` runs 128 base OTs with
//! reversed roles and extends them with IKNP. `Insecure` reveals the choice
//! bits to the sender and exists only for benchmarking.

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use super::channel::{Channel, MsgType};
use super::label::{hash1, labels_from_bytes, labels_to_bytes, random_label, Label};
use super::TwoPcError;
use crate::bits;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OtMode {
    Base,
    Extension,
    Insecure,
}

impl OtMode {
    pub fn code(self) -> u8 {
        match self {
            OtMode::Base => 1,
            OtMode::Extension => 2,
            OtMode::Insecure => 3,
        }
    }
}

impl std::str::FromStr for OtMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "base" => Ok(OtMode::Base),
            "iknp" | "extension" => Ok(OtMode::Extension),
            "insecure" => Ok(OtMode::Insecure),
            _ => Err(format!("unknown OT mode `{s}` (base, iknp, insecure)")),
        }
    }
}

const KAPPA: usize = 128;
const PAIRS_PER_FRAME: usize = 1 << 16;

fn violation(msg: impl Into<String>) -> TwoPcError {
    TwoPcError::ProtocolViolation(msg.into())
}

fn header(mode: OtMode, count: usize) -> Vec<u8> {
    let mut h = vec![mode.code()];
    h.extend_from_slice(&(count as u64).to_be_bytes());
    h
}

fn exchange_header(ch: &mut Channel, mode: OtMode, count: usize) -> Result<(), TwoPcError> {
    ch.send(MsgType::OtMsg, &header(mode, count))?;
    let peer = ch.recv_expect(MsgType::OtMsg)?;
    if peer.len() != 9 || peer[0] != mode.code() {
        return Err(violation("peer uses a different OT mode"));
    }
    let theirs = u64::from_be_bytes(peer[1..].try_into().unwrap());
    if theirs != count as u64 {
        return Err(violation(format!("OT count mismatch: {count} here, {theirs} at peer")));
    }
    Ok(())
}

/// Sender side: the receiver learns one string of each pair.
pub fn ot_send<R: RngCore + CryptoRng>(
    ch: &mut Channel,
    pairs: &[(Label, Label)],
    mode: OtMode,
    rng: &mut R,
) -> Result<(), TwoPcError> {
    exchange_header(ch, mode, pairs.len())?;
    if pairs.is_empty() {
        return Ok(());
    }
    match mode {
        OtMode::Base => base_send(ch, pairs, rng),
        OtMode::Extension => iknp_send(ch, pairs, rng),
        OtMode::Insecure => {
            let choices = ch.recv_expect(MsgType::OtMsg)?;
            if choices.len() != pairs.len().div_ceil(8) {
                return Err(violation("choice vector length"));
            }
            let choices = bits::unpack_bytes(&choices, pairs.len());
            let chosen: Vec<Label> = pairs.iter().zip(choices).map(|(p, c)| if c { p.1 } else { p.0 }).collect();
            ch.send(MsgType::OtMsg, &labels_to_bytes(&chosen))
        }
    }
}

/// Receiver side: returns the chosen string of each pair.
pub fn ot_receive<R: RngCore + CryptoRng>(
    ch: &mut Channel,
    choices: &[bool],
    mode: OtMode,
    rng: &mut R,
) -> Result<Vec<Label>, TwoPcError> {
    exchange_header(ch, mode, choices.len())?;
    if choices.is_empty() {
        return Ok(Vec::new());
    }
    match mode {
        OtMode::Base => base_receive(ch, choices, rng),
        OtMode::Extension => iknp_receive(ch, choices, rng),
        OtMode::Insecure => {
            ch.send(MsgType::OtMsg, &bits::pack_bytes(choices))?;
            let got = labels_from_bytes(&ch.recv_expect(MsgType::OtMsg)?).ok_or_else(|| violation("label bytes"))?;
            if got.len() != choices.len() {
                return Err(violation("label count"));
            }
            Ok(got)
        }
    }
}

fn kdf(a: &CompressedRistretto, i: usize, p: &RistrettoPoint) -> Label {
    let d = Sha256::new()
        .chain_update(a.as_bytes())
        .chain_update((i as u64).to_be_bytes())
        .chain_update(p.compress().as_bytes())
        .finalize();
    u128::from_le_bytes(d[..16].try_into().unwrap())
}

fn decompress(bytes: &[u8]) -> Result<RistrettoPoint, TwoPcError> {
    CompressedRistretto(bytes.try_into().unwrap()).decompress().ok_or_else(|| violation("invalid group element"))
}

fn base_send<R: RngCore + CryptoRng>(ch: &mut Channel, pairs: &[(Label, Label)], rng: &mut R) -> Result<(), TwoPcError> {
    let a = Scalar::random(rng);
    let big_a = RistrettoPoint::mul_base(&a);
    let a_c = big_a.compress();
    ch.send(MsgType::OtMsg, a_c.as_bytes())?;
    let bs = ch.recv_expect(MsgType::OtMsg)?;
    if bs.len() != 32 * pairs.len() {
        return Err(violation("receiver key count"));
    }
    let mut out = Vec::with_capacity(32 * pairs.len());
    for (i, (chunk, &(m0, m1))) in bs.chunks_exact(32).zip(pairs).enumerate() {
        let b = decompress(chunk)?;
        let k0 = kdf(&a_c, i, &(a * b));
        let k1 = kdf(&a_c, i, &(a * (b - big_a)));
        out.extend_from_slice(&(m0 ^ k0).to_le_bytes());
        out.extend_from_slice(&(m1 ^ k1).to_le_bytes());
    }
    ch.send(MsgType::OtMsg, &out)
}

fn base_receive<R: RngCore + CryptoRng>(ch: &mut Channel, choices: &[bool], rng: &mut R) -> Result<Vec<Label>, TwoPcError> {
    let a_bytes = ch.recv_expect(MsgType::OtMsg)?;
    if a_bytes.len() != 32 {
        return Err(violation("sender key length"));
    }
    let a_c = CompressedRistretto(a_bytes[..].try_into().unwrap());
    let big_a = decompress(&a_bytes)?;
    let mut keys = Vec::with_capacity(choices.len());
    let mut msg = Vec::with_capacity(32 * choices.len());
    for (i, &c) in choices.iter().enumerate() {
        let b = Scalar::random(rng);
        let mut big_b = RistrettoPoint::mul_base(&b);
        if c {
            big_b += big_a;
        }
        msg.extend_from_slice(big_b.compress().as_bytes());
        keys.push(kdf(&a_c, i, &(b * big_a)));
    }
    ch.send(MsgType::OtMsg, &msg)?;
    let es = ch.recv_expect(MsgType::OtMsg)?;
    if es.len() != 32 * choices.len() {
        return Err(violation("ciphertext count"));
    }
    Ok(es
        .chunks_exact(32)
        .zip(choices)
        .zip(keys)
        .map(|((e, &c), k)| {
            let off = if c { 16 } else { 0 };
            u128::from_le_bytes(e[off..off + 16].try_into().unwrap()) ^ k
        })
        .collect())
}

/// AES-CTR expansion of a seed to `blocks` 128-bit words.
fn prg(seed: Label, blocks: usize) -> Vec<u128> {
    let cipher = Aes128::new(GenericArray::from_slice(&seed.to_le_bytes()));
    let mut buf: Vec<_> = (0..blocks as u128).map(|i| GenericArray::clone_from_slice(&i.to_le_bytes())).collect();
    cipher.encrypt_blocks(&mut buf);
    buf.iter().map(|b| u128::from_le_bytes(b.as_slice().try_into().unwrap())).collect()
}

fn pack_blocks(bits: &[bool]) -> Vec<u128> {
    let mut out = vec![0u128; bits.len().div_ceil(128)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 128] |= (b as u128) << (i % 128);
    }
    out
}

/// `columns[j]` holds bit `i` of row `i` at block `i / 128`, position `i % 128`.
fn transpose(columns: &[Vec<u128>], n: usize) -> Vec<u128> {
    let mut rows = vec![0u128; n];
    for (j, col) in columns.iter().enumerate() {
        for (blk, &word) in col.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                let i = blk * 128 + b;
                if i < n {
                    rows[i] |= 1u128 << j;
                }
                w &= w - 1;
            }
        }
    }
    rows
}

fn iknp_receive<R: RngCore + CryptoRng>(ch: &mut Channel, choices: &[bool], rng: &mut R) -> Result<Vec<Label>, TwoPcError> {
    let n = choices.len();
    let blocks = n.div_ceil(128);
    let seeds: Vec<(Label, Label)> = (0..KAPPA).map(|_| (random_label(rng), random_label(rng))).collect();
    base_send(ch, &seeds, rng)?;
    let r = pack_blocks(choices);
    let mut t_cols = Vec::with_capacity(KAPPA);
    for &(k0, k1) in &seeds {
        let t = prg(k0, blocks);
        let u: Vec<u128> = t.iter().zip(prg(k1, blocks)).zip(&r).map(|((t, g), r)| t ^ g ^ r).collect();
        ch.send(MsgType::OtMsg, &labels_to_bytes(&u))?;
        t_cols.push(t);
    }
    let t_rows = transpose(&t_cols, n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let ys = labels_from_bytes(&ch.recv_expect(MsgType::OtMsg)?).ok_or_else(|| violation("label bytes"))?;
        if ys.len() % 2 != 0 || out.len() + ys.len() / 2 > n {
            return Err(violation("extension ciphertext count"));
        }
        for pair in ys.chunks_exact(2) {
            let i = out.len();
            out.push(pair[choices[i] as usize] ^ hash1(t_rows[i], i as u128));
        }
    }
    Ok(out)
}

fn iknp_send<R: RngCore + CryptoRng>(ch: &mut Channel, pairs: &[(Label, Label)], rng: &mut R) -> Result<(), TwoPcError> {
    let n = pairs.len();
    let blocks = n.div_ceil(128);
    let s = random_label(rng);
    let s_bits: Vec<bool> = (0..KAPPA).map(|j| (s >> j) & 1 == 1).collect();
    let ks = base_receive(ch, &s_bits, rng)?;
    let mut q_cols = Vec::with_capacity(KAPPA);
    for (j, &k) in ks.iter().enumerate() {
        let u = labels_from_bytes(&ch.recv_expect(MsgType::OtMsg)?).ok_or_else(|| violation("label bytes"))?;
        if u.len() != blocks {
            return Err(violation("extension column length"));
        }
        let mut q = prg(k, blocks);
        if s_bits[j] {
            q.iter_mut().zip(&u).for_each(|(q, u)| *q ^= u);
        }
        q_cols.push(q);
    }
    let q_rows = transpose(&q_cols, n);
    for (chunk_idx, chunk) in pairs.chunks(PAIRS_PER_FRAME).enumerate() {
        let mut ys = Vec::with_capacity(2 * chunk.len());
        for (k, &(x0, x1)) in chunk.iter().enumerate() {
            let i = chunk_idx * PAIRS_PER_FRAME + k;
            ys.push(x0 ^ hash1(q_rows[i], i as u128));
            ys.push(x1 ^ hash1(q_rows[i] ^ s, i as u128));
        }
        ch.send(MsgType::OtMsg, &labels_to_bytes(&ys))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::thread;

    fn run(pairs: Vec<(Label, Label)>, choices: Vec<bool>, mode: OtMode) -> Result<Vec<Label>, TwoPcError> {
        let (mut a, mut b) = Channel::loopback_pair().unwrap();
        let sender = thread::spawn(move || {
            let mut rng = ChaCha12Rng::seed_from_u64(1);
            ot_send(&mut a, &pairs, mode, &mut rng)
        });
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let got = ot_receive(&mut b, &choices, mode, &mut rng);
        let sent = sender.join().unwrap();
        sent.and(got)
    }

    fn random_pairs(n: usize, seed: u64) -> Vec<(Label, Label)> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n).map(|_| (rng.gen(), rng.gen())).collect()
    }

    #[test]
    fn all_modes_deliver_chosen_strings() {
        for mode in [OtMode::Base, OtMode::Extension, OtMode::Insecure] {
            for n in [1, 5, 128, 300] {
                let pairs = random_pairs(n, n as u64);
                let mut rng = ChaCha12Rng::seed_from_u64(7);
                let choices: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
                let got = run(pairs.clone(), choices.clone(), mode).unwrap();
                let want: Vec<Label> = pairs.iter().zip(&choices).map(|(p, &c)| if c { p.1 } else { p.0 }).collect();
                assert_eq!(got, want, "{mode:?} n={n}");
            }
        }
    }

    #[test]
    fn all_zero_choices_give_first_strings() {
        let pairs = random_pairs(128, 3);
        let got = run(pairs.clone(), vec![false; 128], OtMode::Base).unwrap();
        assert_eq!(got, pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        assert_eq!(got.len() * 16, 128 * 16);
    }

    #[test]
    fn mismatched_counts_are_rejected() {
        let err = run(random_pairs(4, 1), vec![true; 5], OtMode::Base).unwrap_err();
        assert!(matches!(err, TwoPcError::ProtocolViolation(_)), "{err:?}");
    }

    #[test]
    fn empty_transfer() {
        assert!(run(vec![], vec![], OtMode::Extension).unwrap().is_empty());
    }

    #[test]
    fn transpose_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 300;
        let rows: Vec<u128> = (0..n).map(|_| rng.gen()).collect();
        let cols: Vec<Vec<u128>> = (0..128)
            .map(|j| pack_blocks(&rows.iter().map(|r| (r >> j) & 1 == 1).collect::<Vec<_>>()))
            .collect();
        assert_eq!(transpose(&cols, n), rows);
    }
}
