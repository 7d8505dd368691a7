//! MSB-first bit packing helpers shared by the generators and the protocol layer.

/// `width` bits of `value`, most significant first.
pub fn to_bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect()
}

pub fn push_bits(out: &mut Vec<bool>, value: u64, width: usize) {
    out.extend((0..width).rev().map(|i| i < 64 && (value >> i) & 1 == 1));
}

/// Inverse of [`to_bits`]. Bits beyond the low 64 are dropped.
pub fn from_bits(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
}

/// All-ones word of the given width.
pub fn ones(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Smallest `w` with `2^w >= n`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

pub fn pack_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
        .collect()
}

pub fn unpack_bytes(bytes: &[u8], n_bits: usize) -> Vec<bool> {
    (0..n_bits).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect()
}
