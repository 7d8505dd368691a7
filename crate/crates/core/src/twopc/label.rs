//! 128-bit wire labels and the fixed-key AES hash used by garbling and OT.

use std::sync::OnceLock;

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;
use rand::RngCore;

/// A κ = 128 bit label. The least significant bit is the permute bit.
pub type Label = u128;

pub const LABEL_BYTES: usize = 16;

const FIXED_KEY: [u8; 16] = *b"mpsi fixed key!!";

fn fixed_cipher() -> &'static Aes128 {
    static CIPHER: OnceLock<Aes128> = OnceLock::new();
    CIPHER.get_or_init(|| Aes128::new(GenericArray::from_slice(&FIXED_KEY)))
}

pub fn permute_bit(l: Label) -> bool {
    l & 1 == 1
}

pub fn random_label<R: RngCore + ?Sized>(rng: &mut R) -> Label {
    let mut b = [0u8; 16];
    rng.fill_bytes(&mut b);
    u128::from_le_bytes(b)
}

/// Free-XOR offset with its permute bit set.
pub fn random_delta<R: RngCore + ?Sized>(rng: &mut R) -> Label {
    random_label(rng) | 1
}

/// Doubling in GF(2^128) modulo x^128 + x^7 + x^2 + x + 1.
pub fn dbl(x: u128) -> u128 {
    let carry = x >> 127;
    (x << 1) ^ (carry * 0x87)
}

fn pi(x: u128) -> u128 {
    let mut block = GenericArray::clone_from_slice(&x.to_le_bytes());
    fixed_cipher().encrypt_block(&mut block);
    u128::from_le_bytes(block.as_slice().try_into().unwrap())
}

/// Tweakable correlation-robust hash `π(K) ⊕ K` with `K = 2x ⊕ tweak`.
pub fn hash1(x: Label, tweak: u128) -> Label {
    let k = dbl(x) ^ tweak;
    pi(k) ^ k
}

/// Two-input variant with `K = 2a ⊕ 4b ⊕ tweak`.
pub fn hash2(a: Label, b: Label, tweak: u128) -> Label {
    let k = dbl(a) ^ dbl(dbl(b)) ^ tweak;
    pi(k) ^ k
}

pub fn labels_to_bytes(labels: &[Label]) -> Vec<u8> {
    let mut out = Vec::with_capacity(labels.len() * LABEL_BYTES);
    for l in labels {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out
}

/// `None` if the length is not a multiple of the label size.
pub fn labels_from_bytes(bytes: &[u8]) -> Option<Vec<Label>> {
    if !bytes.len().is_multiple_of(LABEL_BYTES) {
        return None;
    }
    Some(bytes.chunks_exact(LABEL_BYTES).map(|c| u128::from_le_bytes(c.try_into().unwrap())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn delta_has_permute_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert!(permute_bit(random_delta(&mut rng)));
        }
    }

    #[test]
    fn doubling_is_linear() {
        let (a, b) = (0x8000_0000_0000_0000_0000_0000_0000_0001u128, 0x1234_5678u128);
        assert_eq!(dbl(a ^ b), dbl(a) ^ dbl(b));
        assert_eq!(dbl(1 << 127), 0x87);
    }

    #[test]
    fn hashes_depend_on_tweak() {
        assert_ne!(hash1(5, 0), hash1(5, 1));
        assert_ne!(hash2(5, 6, 0), hash2(6, 5, 0));
    }

    #[test]
    fn byte_round_trip() {
        let ls = vec![1u128, u128::MAX, 0x0102_0304];
        assert_eq!(labels_from_bytes(&labels_to_bytes(&ls)).unwrap(), ls);
        assert!(labels_from_bytes(&[0; 15]).is_none());
    }
}
