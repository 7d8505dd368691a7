use rand::Rng;

use super::ProtocolError;
use crate::bits;

/// Largest σ accepted for bit-vector sharing.
pub const MAX_BITVECTOR_SIGMA: u32 = 24;

/// One side of an XOR sharing: word `i` of the P1 list XOR word `i` of the
/// P2 list reconstructs word `i` of the shared sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareList {
    pub width: usize,
    pub shares: Vec<u64>,
}

impl ShareList {
    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    /// Circuit input bits, word by word, most significant bit first.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.width * self.shares.len());
        for &s in &self.shares {
            bits::push_bits(&mut out, s, self.width);
        }
        out
    }

    pub fn reconstruct(&self, other: &ShareList) -> Vec<u64> {
        assert_eq!(self.width, other.width);
        self.shares.iter().zip(&other.shares).map(|(a, b)| a ^ b).collect()
    }

    /// Compact byte encoding: `u32` width then each word as 8 bytes, big endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 8 * self.shares.len());
        out.extend_from_slice(&(self.width as u32).to_be_bytes());
        for s in &self.shares {
            out.extend_from_slice(&s.to_be_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<ShareList> {
        if bytes.len() < 4 || !(bytes.len() - 4).is_multiple_of(8) {
            return None;
        }
        let width = u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize;
        if width == 0 || width > 64 {
            return None;
        }
        let shares: Vec<u64> =
            bytes[4..].chunks_exact(8).map(|c| u64::from_be_bytes(c.try_into().unwrap())).collect();
        if shares.iter().any(|&s| s > bits::ones(width)) {
            return None;
        }
        Some(ShareList { width, shares })
    }
}

/// XOR-splits `words` with fresh uniform masks, preserving order.
pub fn share_words<R: Rng + ?Sized>(words: &[u64], width: usize, rng: &mut R) -> (ShareList, ShareList) {
    let mask = bits::ones(width);
    let mut p1 = Vec::with_capacity(words.len());
    let mut p2 = Vec::with_capacity(words.len());
    for &w in words {
        let r = rng.gen::<u64>() & mask;
        p1.push(r);
        p2.push(w ^ r);
    }
    (ShareList { width, shares: p1 }, ShareList { width, shares: p2 })
}

/// Sorts `set` ascending and XOR-shares it. `1^σ` is reserved as the
/// sorting sentinel and rejected.
pub fn share_sorted_set<R: Rng + ?Sized>(
    set: &[u64],
    sigma: u32,
    rng: &mut R,
) -> Result<(ShareList, ShareList), ProtocolError> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(ProtocolError::DuplicateElement(w[0]));
    }
    if let Some(&value) = sorted.iter().find(|&&x| x >= bits::ones(sigma as usize)) {
        return Err(ProtocolError::DomainViolation { value, sigma });
    }
    Ok(share_words(&sorted, sigma as usize, rng))
}

/// Shares the characteristic vector of `set` over `[0, 2^σ)`. Lists hold
/// one-bit words; bit `i` is the membership of element `i`.
pub fn share_bitvector<R: Rng + ?Sized>(
    set: &[u64],
    sigma: u32,
    rng: &mut R,
) -> Result<(ShareList, ShareList), ProtocolError> {
    if sigma > MAX_BITVECTOR_SIGMA {
        return Err(ProtocolError::UniverseTooLarge(sigma));
    }
    let size = 1usize << sigma;
    let mut v = vec![0u64; size];
    for &x in set {
        if x >= size as u64 - 1 {
            return Err(ProtocolError::DomainViolation { value: x, sigma });
        }
        if v[x as usize] == 1 {
            return Err(ProtocolError::DuplicateElement(x));
        }
        v[x as usize] = 1;
    }
    Ok(share_words(&v, 1, rng))
}
