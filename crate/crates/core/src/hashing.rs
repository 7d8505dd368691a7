//! Simple hashing to bins with permutation-based hashing.
//!
//! An element `x` of `σ` bits is split into `x_L` (the top `log2 β` bits)
//! and `x_R` (the remaining `σ' = σ - log2 β` bits). It is placed in bin
//! `x_L ^ f(x_R)` and only `x_R` is stored; two elements with the same bin
//! and the same stored value are equal. `f` is a keyed AES-based function
//! whose seed is public, so every party hashes identically.
//!
//! Stored records carry a leading flag bit: real elements are `0 ‖ x_R`,
//! padding dummies are `1 ‖ (party·B + slot)`. Dummies therefore never equal
//! a real record nor a dummy of another party.

use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits;

#[derive(Debug, Error, PartialEq)]
pub enum HashError {
    #[error("bin {bin} received {load} elements but holds at most {capacity}")]
    BinOverflow { bin: u64, load: usize, capacity: usize },
    #[error("element {value:#x} is outside the domain [0, 2^{sigma} - 2]")]
    DomainViolation { value: u64, sigma: u32 },
    #[error("element {0:#x} appears twice")]
    DuplicateElement(u64),
    #[error("no bin layout satisfies the constraints: {0}")]
    Infeasible(String),
    #[error("invalid bin layout: {0}")]
    InvalidLayout(String),
}

/// Public parameters of a bin table shared by all parties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinLayout {
    /// Number of parties contributing a table.
    pub parties: usize,
    /// Number of bins, a power of two.
    pub beta: u64,
    /// Slots per bin after padding.
    pub capacity: usize,
    /// Element width.
    pub sigma: u32,
    /// Public seed of the round function.
    pub f_seed: u64,
}

impl BinLayout {
    pub fn new(parties: usize, beta: u64, capacity: usize, sigma: u32, f_seed: u64) -> Result<BinLayout, HashError> {
        if !beta.is_power_of_two() {
            return Err(HashError::InvalidLayout(format!("β = {beta} is not a power of two")));
        }
        if beta.trailing_zeros() >= sigma {
            return Err(HashError::InvalidLayout(format!("σ = {sigma} leaves no stored bits with β = {beta}")));
        }
        if capacity == 0 || parties < 2 {
            return Err(HashError::InvalidLayout("need at least two parties and one slot".into()));
        }
        Ok(BinLayout { parties, beta, capacity, sigma, f_seed })
    }

    pub fn bin_bits(&self) -> u32 {
        self.beta.trailing_zeros()
    }

    /// `σ' = σ - log2 β`.
    pub fn sigma_stored(&self) -> u32 {
        self.sigma - self.bin_bits()
    }

    /// Bits needed for the dummy counter `party·B + slot`.
    pub fn dummy_bits(&self) -> u32 {
        bits::ceil_log2((self.parties * self.capacity) as u64 + 1)
    }

    /// Width of a stored record: flag bit plus payload.
    pub fn record_width(&self) -> usize {
        1 + self.sigma_stored().max(self.dummy_bits()) as usize
    }

    fn payload_bits(&self) -> u32 {
        self.record_width() as u32 - 1
    }

    pub fn round_function(&self) -> RoundFunction {
        RoundFunction::new(self.f_seed, self.beta)
    }

    pub fn real_record(&self, stored: u64) -> u64 {
        stored
    }

    pub fn dummy_record(&self, party: usize, slot: usize) -> u64 {
        (1u64 << self.payload_bits()) | (party * self.capacity + slot) as u64
    }

    /// `Some(stored)` for a real record, `None` for a dummy or sentinel.
    pub fn decode_record(&self, record: u64) -> Option<u64> {
        (record >> self.payload_bits() == 0).then_some(record)
    }
}

/// Keyed pseudorandom function onto `[0, β)`.
#[derive(Clone)]
pub struct RoundFunction {
    cipher: Aes128,
    mask: u64,
}

impl RoundFunction {
    pub fn new(seed: u64, beta: u64) -> RoundFunction {
        let digest = Sha256::new().chain_update(b"mpsi bin function").chain_update(seed.to_le_bytes()).finalize();
        let cipher = Aes128::new(GenericArray::from_slice(&digest[..16]));
        RoundFunction { cipher, mask: beta - 1 }
    }

    pub fn eval(&self, x: u64) -> u64 {
        let mut block = GenericArray::clone_from_slice(&(x as u128).to_le_bytes());
        self.cipher.encrypt_block(&mut block);
        u64::from_le_bytes(block[..8].try_into().unwrap()) & self.mask
    }
}

fn check_domain(x: u64, sigma: u32) -> Result<(), HashError> {
    if x >= bits::ones(sigma as usize) {
        return Err(HashError::DomainViolation { value: x, sigma });
    }
    Ok(())
}

/// `(bin, stored)` for `x` using an explicit round function.
pub fn perm_hash_with(x: u64, layout: &BinLayout, f: impl Fn(u64) -> u64) -> Result<(u64, u64), HashError> {
    check_domain(x, layout.sigma)?;
    let low = layout.sigma_stored();
    let stored = x & bits::ones(low as usize);
    let high = if low >= 64 { 0 } else { x >> low };
    Ok((high ^ (f(stored) & (layout.beta - 1)), stored))
}

pub fn perm_hash(x: u64, layout: &BinLayout) -> Result<(u64, u64), HashError> {
    let f = layout.round_function();
    perm_hash_with(x, layout, |v| f.eval(v))
}

/// Recovers the element from its bin and stored value.
pub fn unhash(bin: u64, stored: u64, layout: &BinLayout, f: &RoundFunction) -> u64 {
    let high = bin ^ f.eval(stored);
    (high << layout.sigma_stored()) | stored
}

/// One party's padded, per-bin sorted records.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinTable {
    pub party: usize,
    pub bins: Vec<Vec<u64>>,
    /// Real elements per bin before padding.
    pub loads: Vec<usize>,
}

/// Hashes `set` into the layout's bins, pads each bin with this party's
/// dummies and sorts it. Overflow aborts the whole protocol.
pub fn build_bins(set: &[u64], layout: &BinLayout, party: usize) -> Result<BinTable, HashError> {
    assert!(party < layout.parties, "party {party} outside the layout");
    let f = layout.round_function();
    let mut bins: Vec<Vec<u64>> = vec![Vec::new(); layout.beta as usize];
    for &x in set {
        let (bin, stored) = perm_hash_with(x, layout, |v| f.eval(v))?;
        bins[bin as usize].push(layout.real_record(stored));
    }
    let mut loads = Vec::with_capacity(bins.len());
    for (i, bin) in bins.iter_mut().enumerate() {
        if bin.len() > layout.capacity {
            return Err(HashError::BinOverflow { bin: i as u64, load: bin.len(), capacity: layout.capacity });
        }
        bin.sort_unstable();
        if let Some(w) = bin.windows(2).find(|w| w[0] == w[1]) {
            return Err(HashError::DuplicateElement(unhash(i as u64, w[0], layout, &f)));
        }
        loads.push(bin.len());
        let real = bin.len();
        bin.extend((real..layout.capacity).map(|slot| layout.dummy_record(party, slot)));
    }
    Ok(BinTable { party, bins, loads })
}

/// Both forms of the union bound on the probability that some bin of some
/// party overflows capacity `(1 + δ)·b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailureBound {
    /// `m·(n/b)·e^(-δ²b/3)`.
    pub union: f64,
    /// `log2` of the simplified bound `2^(-δ²b/3 + log2 n)`.
    pub simplified_log2: f64,
}

impl FailureBound {
    pub fn union_log2(&self) -> f64 {
        self.union.log2()
    }

    pub fn simplified(&self) -> f64 {
        self.simplified_log2.exp2()
    }
}

pub fn failure_bound(m: usize, n: f64, b: f64, delta: f64) -> FailureBound {
    let exponent = delta * delta * b / 3.0;
    FailureBound { union: m as f64 * (n / b) * (-exponent).exp(), simplified_log2: -exponent + n.log2() }
}

/// Smallest integer `b` with `b > 3(log2 n + γ)/δ²`.
pub fn min_bin_capacity(gamma: f64, n: f64, delta: f64) -> u64 {
    let bound = 3.0 * (n.log2() + gamma) / (delta * delta);
    bound.floor() as u64 + 1
}

/// `σ·(m·n/2·log2²(m·n) + 8·m·n/3 + n)`: non-free gates of one mSCS instance.
pub fn gate_upper_bound(m: f64, n: f64, sigma: f64) -> f64 {
    let mn = m * n;
    let l = mn.log2();
    sigma * (mn / 2.0 * l * l + 8.0 * mn / 3.0 + n)
}

/// Result of a bin-parameter search.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizedParams {
    pub m: usize,
    pub n: u64,
    pub sigma: u32,
    pub gamma: f64,
    pub delta: f64,
    /// Ideal load `n/β`.
    pub b: f64,
    pub beta: u64,
    pub capacity: u64,
    pub sigma_stored: u32,
    /// Cost of one bin under the search's cost function.
    pub per_bin: f64,
    /// `β·per_bin`.
    pub total: f64,
}

impl OptimizedParams {
    /// `β·per_bin / n`.
    pub fn gates_per_element(&self) -> f64 {
        self.total / self.n as f64
    }

    /// `per_bin / (m·B/2)`, the per-element normalization used by the
    /// published parameter tables.
    pub fn gates_per_record_pair(&self) -> f64 {
        self.per_bin / (self.m as f64 * self.capacity as f64 / 2.0)
    }

    pub fn failure_bound(&self) -> FailureBound {
        failure_bound(self.m, self.n as f64, self.b, self.delta)
    }

    pub fn layout(&self, f_seed: u64) -> Result<BinLayout, HashError> {
        BinLayout::new(self.m, self.beta, self.capacity as usize, self.sigma, f_seed)
    }
}

/// Searches power-of-two bin counts `β` and, for each, the smallest capacity
/// `B = (1 + δ)·b` that keeps `b > 3(log2 n + γ)/δ²` with `δ ∈ (0, 1]`.
/// `cost(B, σ')` prices one bin; the layout with the lowest `β·cost` wins.
pub fn optimize_with(
    m: usize,
    n: u64,
    sigma: u32,
    gamma: f64,
    mut cost: impl FnMut(u64, u32) -> f64,
) -> Result<OptimizedParams, HashError> {
    if n == 0 || m < 2 {
        return Err(HashError::Infeasible("need n ≥ 1 and m ≥ 2".into()));
    }
    if sigma >= 64 || n > bits::ones(sigma as usize) {
        return Err(HashError::Infeasible(format!("{n} distinct elements do not fit in σ = {sigma} bits")));
    }
    let slack = 3.0 * ((n as f64).log2() + gamma);
    let mut best: Option<OptimizedParams> = None;
    let mut k = 0u32;
    while k < sigma && (1u64 << k) <= n {
        let beta = 1u64 << k;
        let b = n as f64 / beta as f64;
        let delta_min = (slack / b).sqrt();
        if delta_min < 1.0 {
            let capacity = ((1.0 + delta_min) * b).floor() as u64 + 1;
            let delta = capacity as f64 / b - 1.0;
            if delta <= 1.0 && b > slack / (delta * delta) {
                let per_bin = cost(capacity, sigma - k);
                let total = beta as f64 * per_bin;
                if best.as_ref().is_none_or(|p| total < p.total) {
                    best = Some(OptimizedParams {
                        m,
                        n,
                        sigma,
                        gamma,
                        delta,
                        b,
                        beta,
                        capacity,
                        sigma_stored: sigma - k,
                        per_bin,
                        total,
                    });
                }
            }
        }
        k += 1;
    }
    best.ok_or_else(|| {
        HashError::Infeasible(format!("no β satisfies b > 3(log2 n + γ)/δ² with δ ≤ 1 (n = {n}, γ = {gamma})"))
    })
}

/// Minimizes the closed-form upper bound on non-free gates.
pub fn optimize_params(m: usize, n: u64, sigma: u32, gamma: f64) -> Result<OptimizedParams, HashError> {
    optimize_with(m, n, sigma, gamma, |cap, stored| gate_upper_bound(m as f64, cap as f64, stored as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn layout(beta: u64, cap: usize, sigma: u32) -> BinLayout {
        BinLayout::new(3, beta, cap, sigma, 42).unwrap()
    }

    #[test]
    fn perm_hash_splits_and_masks() {
        let l = layout(16, 8, 8);
        let f = |v: u64| if v == 0xB { 0x3 } else { 0 };
        assert_eq!(perm_hash_with(0xAB, &l, f).unwrap(), (0x9, 0xB));
    }

    #[test]
    fn single_bin_stores_everything() {
        let l = layout(1, 8, 8);
        assert_eq!(l.sigma_stored(), 8);
        assert_eq!(perm_hash(0xAB, &l).unwrap(), (0, 0xAB));
    }

    #[test]
    fn sentinel_is_outside_the_domain() {
        let l = layout(16, 8, 8);
        assert_eq!(perm_hash(0xFF, &l), Err(HashError::DomainViolation { value: 0xFF, sigma: 8 }));
        assert!(perm_hash(0x1FF, &l).is_err());
    }

    #[test]
    fn exhaustive_soundness_sigma10_beta16() {
        let l = BinLayout::new(3, 16, 8, 10, 9).unwrap();
        let f = l.round_function();
        let mut seen = HashSet::new();
        for x in 0..(1u64 << 10) - 1 {
            let (bin, stored) = perm_hash(x, &l).unwrap();
            assert!(bin < 16 && stored < 64);
            assert!(seen.insert((bin, stored)), "collision at {x}");
            assert_eq!(unhash(bin, stored, &l, &f), x);
        }
    }

    #[test]
    fn layout_validation() {
        assert!(BinLayout::new(3, 6, 8, 8, 0).is_err());
        assert!(BinLayout::new(3, 256, 8, 8, 0).is_err());
        assert!(BinLayout::new(1, 2, 8, 8, 0).is_err());
    }

    #[test]
    fn bins_are_padded_with_party_dummies() {
        let l = BinLayout::new(3, 2, 4, 8, 1).unwrap();
        let t = build_bins(&[1, 2, 3, 4], &l, 1).unwrap();
        assert_eq!(t.bins.len(), 2);
        assert_eq!(t.bins.iter().map(Vec::len).sum::<usize>(), 8);
        assert_eq!(t.loads.iter().sum::<usize>(), 4);
        let dummies = t.bins.iter().flatten().filter(|&&r| l.decode_record(r).is_none()).count();
        assert_eq!(dummies, 4);
        for bin in &t.bins {
            assert!(bin.windows(2).all(|w| w[0] < w[1]));
        }
        let other = build_bins(&[1, 2, 3, 4], &l, 2).unwrap();
        let mine: HashSet<u64> = t.bins.iter().flatten().filter(|&&r| l.decode_record(r).is_none()).copied().collect();
        assert!(other.bins.iter().flatten().all(|r| !mine.contains(r)));
    }

    #[test]
    fn full_bin_has_no_dummies() {
        let l = BinLayout::new(3, 1, 4, 8, 1).unwrap();
        let t = build_bins(&[9, 3, 7, 1], &l, 0).unwrap();
        assert_eq!(t.bins[0], vec![1, 3, 7, 9]);
    }

    #[test]
    fn overflow_aborts() {
        let l = BinLayout::new(3, 2, 4, 8, 5).unwrap();
        let f = l.round_function();
        let crowded: Vec<u64> = (0..254u64).filter(|&x| perm_hash_with(x, &l, |v| f.eval(v)).unwrap().0 == 0).take(5).collect();
        assert!(matches!(build_bins(&crowded, &l, 0), Err(HashError::BinOverflow { bin: 0, load: 5, capacity: 4 })));
    }

    #[test]
    fn record_width_grows_for_dummy_space() {
        let l = BinLayout::new(5, 16, 16, 8, 0).unwrap();
        assert_eq!(l.sigma_stored(), 4);
        assert_eq!(l.dummy_bits(), 7);
        assert_eq!(l.record_width(), 8);
        assert_ne!(l.dummy_record(4, 15), bits::ones(8));
    }

    #[test]
    fn failure_bound_examples() {
        let fb = failure_bound(3, 256.0, 292.0, 0.82);
        assert!((fb.simplified_log2 - (-57.45)).abs() < 0.01, "{}", fb.simplified_log2);
        let gamma = 20.0;
        let n: f64 = 1024.0;
        let b = 3.0 * (n.log2() + gamma);
        assert!((failure_bound(3, n, b, 1.0).simplified_log2 + gamma).abs() < 1e-9);
        let mut last = f64::INFINITY;
        for b in [10.0, 50.0, 100.0, 500.0] {
            let v = failure_bound(3, 4096.0, b, 0.5).union;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn min_capacity_examples() {
        assert_eq!(min_bin_capacity(40.0, 4096.0, 1.0), 157);
        assert_eq!(min_bin_capacity(40.0, 256.0, 0.82), 215);
        assert!(min_bin_capacity(40.0, 256.0, 0.1) > 90 * min_bin_capacity(40.0, 256.0, 1.0));
    }

    #[test]
    fn upper_bound_examples() {
        let v = gate_upper_bound(3.0, 8.0, 16.0);
        let l = 24f64.log2();
        assert!((v - 16.0 * (12.0 * l * l + 64.0 + 8.0)).abs() < 1e-9);
        assert!((v - 5188.6).abs() < 1.0, "{v}");
        assert!((gate_upper_bound(3.0, 8.0, 32.0) - 2.0 * v).abs() < 1e-9);
        assert!((gate_upper_bound(1.0, 1.0, 12.0) - 12.0 * 11.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn optimizer_respects_constraints() {
        for log_n in [8u32, 12, 16, 24] {
            for sigma in [log_n + 4, log_n + 8] {
                let p = optimize_params(3, 1 << log_n, sigma, 40.0).unwrap();
                let bound = 3.0 * (log_n as f64 + 40.0) / (p.delta * p.delta);
                assert!(p.b > bound);
                assert!(p.delta > 0.0 && p.delta <= 1.0);
                assert!(p.beta.is_power_of_two());
                assert_eq!(p.sigma_stored, sigma - p.beta.trailing_zeros());
                assert!(p.capacity as f64 >= (1.0 + p.delta) * p.b - 1e-9);
                assert!(p.failure_bound().simplified_log2 < -40.0);
            }
        }
    }

    #[test]
    fn single_bin_degenerates_to_plain_bound() {
        let p = optimize_params(3, 1 << 8, 12, 40.0).unwrap();
        if p.beta == 1 {
            assert_eq!(p.sigma_stored, 12);
            let expected = gate_upper_bound(3.0, p.capacity as f64, 12.0) / 256.0;
            assert!((p.gates_per_element() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_inputs() {
        assert!(matches!(optimize_params(3, 1 << 16, 2, 40.0), Err(HashError::Infeasible(_))));
        assert!(matches!(optimize_params(3, 16, 12, 40.0), Err(HashError::Infeasible(_))));
    }

    #[test]
    fn small_overflow_rate_at_min_capacity() {
        // 200 sets at γ = 10 is far too few to see a 2^-10 event; this only
        // guards against gross mistakes in placement.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = optimize_params(3, 1 << 10, 32, 10.0).unwrap();
        let l = p.layout(77).unwrap();
        let mut overflows = 0;
        for _ in 0..200 {
            let mut set = HashSet::new();
            while set.len() < 1024 {
                set.insert(rng.gen_range(0..bits::ones(32)));
            }
            let set: Vec<u64> = set.into_iter().collect();
            if build_bins(&set, &l, 0).is_err() {
                overflows += 1;
            }
        }
        assert_eq!(overflows, 0);
    }
}
