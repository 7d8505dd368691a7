use std::sync::Arc;

use super::{FunctionKind, ProtocolError, ShareList, Variant};
use crate::bits;
use crate::circuit::{Circuit, CircuitBuilder, GateCounter, GateSink, WireId};
use crate::gadgets::{self, Word};
use crate::hashing::{self, BinLayout, HashError, OptimizedParams};
use crate::shufflenet::{self, switch_count};
use crate::sortnet::{emit_merge_network, MergePlan};

/// How one computing party's input bits are laid out. Both sides share the
/// same layout: the share words of party 0, then party 1, ..., each word
/// most significant bit first, followed by the side's shuffle control bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputLayout {
    pub parties: usize,
    pub words: usize,
    pub width: usize,
    pub controls: usize,
}

impl InputLayout {
    pub fn share_bits(&self) -> usize {
        self.parties * self.words * self.width
    }

    pub fn side_len(&self) -> usize {
        self.share_bits() + self.controls
    }

    /// Concatenates one side's inputs in circuit order.
    pub fn assemble(&self, shares: &[&ShareList], controls: &[bool]) -> Vec<bool> {
        assert_eq!(shares.len(), self.parties, "one share list per party");
        assert_eq!(controls.len(), self.controls, "control bit count");
        let mut out = Vec::with_capacity(self.side_len());
        for s in shares {
            assert_eq!((s.len(), s.width), (self.words, self.width), "share list shape");
            out.extend(s.to_bits());
        }
        out.extend_from_slice(controls);
        out
    }
}

pub fn mbwa_layout(m: usize, sigma: u32) -> InputLayout {
    InputLayout { parties: m, words: 1 << sigma, width: 1, controls: 0 }
}

pub fn mscs_layout(m: usize, n: usize, width: usize, f: FunctionKind) -> InputLayout {
    let controls = if f == FunctionKind::RevealShuffled { switch_count(n) } else { 0 };
    InputLayout { parties: m, words: n, width, controls }
}

/// `m` share vectors per side; output bit `i` is set iff every party holds `i`.
pub fn build_mbwa(m: usize, sigma: u32) -> Result<Circuit, ProtocolError> {
    if sigma > super::MAX_BITVECTOR_SIGMA {
        return Err(ProtocolError::UniverseTooLarge(sigma));
    }
    assert!(m >= 2, "mbwa needs at least two parties");
    let layout = mbwa_layout(m, sigma);
    let size = layout.words;
    let mut b = CircuitBuilder::new(layout.side_len(), layout.side_len());
    let mut acc: Vec<WireId> = Vec::new();
    for party in 0..m {
        let v: Vec<WireId> = (0..size)
            .map(|i| {
                let idx = party * size + i;
                let (x, y) = (b.p1_input(idx), b.p2_input(idx));
                b.xor(x, y)
            })
            .collect();
        acc = if party == 0 { v } else { acc.iter().zip(&v).map(|(&a, &x)| b.and(a, x)).collect() };
    }
    Ok(b.finish(acc)?)
}

/// AND gates per stage of an mSCS circuit, plus the free reconstruction XORs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub reconstruct_xor: u64,
    pub merge: u64,
    pub compare: u64,
    pub shuffle: u64,
    pub tail: u64,
}

impl StageCounts {
    pub fn total_and(&self) -> u64 {
        self.merge + self.compare + self.shuffle + self.tail
    }
}

struct Tally<'a, S: ?Sized> {
    inner: &'a mut S,
    and: u64,
    xor: u64,
}

impl<'a, S: GateSink + ?Sized> Tally<'a, S> {
    fn new(inner: &'a mut S) -> Self {
        Tally { inner, and: 0, xor: 0 }
    }

    fn take_and(&mut self) -> u64 {
        std::mem::take(&mut self.and)
    }
}

impl<S: GateSink + ?Sized> GateSink for Tally<'_, S> {
    fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        self.xor += 1;
        self.inner.xor(a, b)
    }

    fn and(&mut self, a: WireId, b: WireId) -> WireId {
        self.and += 1;
        self.inner.and(a, b)
    }

    fn inv(&mut self, a: WireId) -> WireId {
        self.inner.inv(a)
    }

    fn constant(&mut self, value: bool) -> WireId {
        self.inner.constant(value)
    }
}

fn check_kind(f: FunctionKind) -> Result<(), ProtocolError> {
    if f == FunctionKind::BitVector {
        return Err(ProtocolError::InvalidVariant("mSCS circuits cannot compute a bit-vector".into()));
    }
    Ok(())
}

/// Record width revealed per output slot.
fn record_width(width: usize, variant: Variant) -> usize {
    width + (variant == Variant::Robust) as usize
}

/// Emits the sort-compare-shuffle pipeline. `p1` and `p2` are the input
/// wires of each side laid out as [`mscs_layout`] describes.
///
/// Outputs for `RevealShuffled` are `n` records, each the indicator bit (in
/// the robust variant) followed by the value; for `Cardinality` the match
/// count, most significant bit first.
pub fn emit_mscs<S: GateSink + ?Sized>(
    sink: &mut S,
    p1: &[WireId],
    p2: &[WireId],
    m: usize,
    n: usize,
    width: usize,
    f: FunctionKind,
    variant: Variant,
) -> Result<(Vec<WireId>, StageCounts), ProtocolError> {
    check_kind(f)?;
    assert!(m >= 2 && n >= 1 && width >= 1, "degenerate mSCS dimensions");
    let layout = mscs_layout(m, n, width, f);
    assert_eq!((p1.len(), p2.len()), (layout.side_len(), layout.side_len()), "input wire count");
    let mut t = Tally::new(sink);
    let mut counts = StageCounts::default();

    let lists: Vec<Vec<Word>> = (0..m)
        .map(|party| {
            (0..n)
                .map(|j| {
                    let base = (party * n + j) * width;
                    Word::new((base..base + width).map(|k| t.xor(p1[k], p2[k])).collect())
                })
                .collect()
        })
        .collect();
    counts.reconstruct_xor = t.xor;
    t.take_and();

    let sorted = emit_merge_network(&mut t, &lists).expect("lists are rectangular");
    counts.merge = t.take_and();
    let sorted = &sorted[..m * n];

    let mut selections = Vec::with_capacity(n);
    let mut indicators = Vec::with_capacity(n);
    for j in 0..n {
        let last = j == n - 1;
        let window = if last { &sorted[m * j..m * j + m] } else { &sorted[m * j..m * j + 2 * m - 1] };
        match f {
            FunctionKind::RevealShuffled => {
                let sel = if last {
                    gadgets::dup_select_final(&mut t, window, m)
                } else {
                    gadgets::dup_select_window(&mut t, window, m)
                }
                .expect("uniform widths");
                selections.push(sel);
            }
            _ => {
                let ind = if last {
                    gadgets::equality(&mut t, &window[0], &window[m - 1]).expect("uniform widths")
                } else {
                    let eqs: Vec<WireId> = (0..m)
                        .map(|i| gadgets::equality(&mut t, &window[i], &window[i + m - 1]).expect("uniform widths"))
                        .collect();
                    gadgets::or_all(&mut t, &eqs)
                };
                indicators.push(ind);
            }
        }
    }
    counts.compare = t.take_and();

    let outputs = match f {
        FunctionKind::RevealShuffled => {
            let records: Vec<Word> = selections
                .into_iter()
                .map(|s| match variant {
                    Variant::Robust => {
                        let mut w = vec![s.indicator];
                        w.extend(s.value.into_wires());
                        Word::new(w)
                    }
                    Variant::PaperExact => s.value,
                })
                .collect();
            let c = layout.controls;
            let shuffled = shufflenet::emit_double_shuffle(
                &mut t,
                &records,
                &p1[layout.share_bits()..layout.share_bits() + c],
                &p2[layout.share_bits()..layout.share_bits() + c],
            )
            .expect("control counts match the layout");
            counts.shuffle = t.take_and();
            shuffled.into_iter().flat_map(Word::into_wires).collect()
        }
        _ => {
            let count = gadgets::popcount_tail(&mut t, &indicators);
            counts.tail = t.take_and();
            count.into_wires()
        }
    };
    Ok((outputs, counts))
}

/// Full mSCS circuit for `m` sorted lists of `n` words of `width` bits.
pub fn build_mscs(m: usize, n: usize, width: usize, f: FunctionKind, variant: Variant) -> Result<Circuit, ProtocolError> {
    check_kind(f)?;
    let layout = mscs_layout(m, n, width, f);
    let side = layout.side_len();
    let mut b = CircuitBuilder::new(side, side);
    let p1: Vec<WireId> = (0..side).map(|i| b.p1_input(i)).collect();
    let p2: Vec<WireId> = (0..side).map(|i| b.p2_input(i)).collect();
    let (outputs, _) = emit_mscs(&mut b, &p1, &p2, m, n, width, f, variant)?;
    Ok(b.finish(outputs)?)
}

/// Generates the circuit into a counter and reports per-stage AND gates.
pub fn measure_mscs(
    m: usize,
    n: usize,
    width: usize,
    f: FunctionKind,
    variant: Variant,
) -> Result<StageCounts, ProtocolError> {
    let side = mscs_layout(m, n, width, f).side_len();
    let mut c = GateCounter::new(2 * side);
    let p1: Vec<WireId> = (0..side).map(|i| c.input(i)).collect();
    let p2: Vec<WireId> = (side..2 * side).map(|i| c.input(i)).collect();
    let (_, counts) = emit_mscs(&mut c, &p1, &p2, m, n, width, f, variant)?;
    debug_assert_eq!(c.stats().and_count, counts.total_and());
    Ok(counts)
}

/// AND gates of the popcount tail over `k` indicators.
fn popcount_ands(k: usize) -> u64 {
    let mut c = GateCounter::new(k);
    let inds: Vec<WireId> = (0..k).map(|i| c.input(i)).collect();
    gadgets::popcount_tail(&mut c, &inds);
    c.stats().and_count
}

/// Per-stage counts from closed forms, without generating the circuit.
pub fn mscs_counts(
    m: usize,
    n: usize,
    width: usize,
    f: FunctionKind,
    variant: Variant,
) -> Result<StageCounts, ProtocolError> {
    check_kind(f)?;
    let (m64, n64, w) = (m as u64, n as u64, width as u64);
    let mut c = StageCounts {
        reconstruct_xor: m64 * n64 * w,
        merge: MergePlan::new(m, n).and_count(width),
        ..StageCounts::default()
    };
    match f {
        FunctionKind::RevealShuffled => {
            c.compare = ((m64 + 1) * w - 1) * (n64 - 1) + 2 * w - 1;
            c.shuffle = 2 * switch_count(n) as u64 * record_width(width, variant) as u64;
        }
        _ => {
            c.compare = (m64 * w - 1) * (n64 - 1) + w - 1;
            c.tail = popcount_ands(n);
        }
    }
    Ok(c)
}

/// One circuit per bin, all identical. Record width is `σ'` in the
/// paper-exact variant and the flagged record width in the robust one.
pub fn build_hashing_mscs(
    layout: &BinLayout,
    f: FunctionKind,
    variant: Variant,
) -> Result<Vec<Arc<Circuit>>, ProtocolError> {
    let width = bin_record_width(layout.parties, layout.capacity, layout.sigma_stored(), variant);
    let circuit = Arc::new(build_mscs(layout.parties, layout.capacity, width, f, variant)?);
    Ok(vec![circuit; layout.beta as usize])
}

fn bin_record_width(m: usize, capacity: usize, sigma_stored: u32, variant: Variant) -> usize {
    match variant {
        Variant::PaperExact => sigma_stored as usize,
        Variant::Robust => 1 + sigma_stored.max(bits::ceil_log2((m * capacity) as u64 + 1)) as usize,
    }
}

/// Bin search priced by the exact AND count of the generated per-bin circuit.
pub fn optimize_exact(
    m: usize,
    n: u64,
    sigma: u32,
    gamma: f64,
    f: FunctionKind,
    variant: Variant,
) -> Result<OptimizedParams, HashError> {
    hashing::optimize_with(m, n, sigma, gamma, |cap, stored| {
        let width = bin_record_width(m, cap as usize, stored, variant);
        mscs_counts(m, cap as usize, width, f, variant).map(|c| c.total_and() as f64).unwrap_or(f64::INFINITY)
    })
}

/// Plain mSCS against the best hashing-mSCS layout, both in exact AND gates.
#[derive(Clone, Debug, PartialEq)]
pub struct HashingComparison {
    pub plain: u64,
    pub params: OptimizedParams,
    pub hashing: u64,
}

impl HashingComparison {
    /// Fraction of AND gates saved by hashing (negative if it costs more).
    pub fn reduction(&self) -> f64 {
        1.0 - self.hashing as f64 / self.plain as f64
    }
}

pub fn plain_vs_hashing(
    m: usize,
    n: u64,
    sigma: u32,
    gamma: f64,
    f: FunctionKind,
    variant: Variant,
) -> Result<HashingComparison, ProtocolError> {
    let plain = mscs_counts(m, n as usize, sigma as usize, f, variant)?.total_and();
    let params = optimize_exact(m, n, sigma, gamma, f, variant)?;
    let hashing = params.total as u64;
    Ok(HashingComparison { plain, params, hashing })
}
