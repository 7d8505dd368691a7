//! Generated gate counts against closed forms, and optimizer output against
//! published reference parameters.

use super::{build_mbwa, measure_mscs, mscs_counts, plain_vs_hashing, FunctionKind, HashingComparison, ProtocolError, Variant};
use crate::circuit::{Circuit, CircuitBuilder, CircuitStats};
use crate::gadgets::Word;
use crate::sortnet::emit_merge_network;
use crate::hashing::{optimize_params, HashError, OptimizedParams};

/// One stage of a gate-count comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRow {
    pub stage: &'static str,
    pub generated: u64,
    pub formula: u64,
}

impl StageRow {
    pub fn matches(&self) -> bool {
        self.generated == self.formula
    }
}

/// `2w·((N/4)·log2 N·log2(N/2) + N − 1)` with `N = m·n`, defined when `N`
/// is a power of two.
pub fn merge_formula(m: usize, n: usize, width: usize) -> Option<u64> {
    let big = (m * n) as u64;
    if !big.is_power_of_two() || big < 2 {
        return None;
    }
    let lg = big.trailing_zeros() as u64;
    Some(2 * width as u64 * (big / 4 * lg * (lg - 1) + big - 1))
}

/// `[(m+1)w − 1](n − 1) + 2w − 1`.
pub fn compare_formula(m: usize, n: usize, width: usize) -> u64 {
    let (m, n, w) = (m as u64, n as u64, width as u64);
    ((m + 1) * w - 1) * (n - 1) + 2 * w - 1
}

/// `(4n − 2)w − n`, the three-party form of [`compare_formula`].
pub fn compare_formula_m3(n: usize, width: usize) -> u64 {
    let (n, w) = (n as u64, width as u64);
    (4 * n - 2) * w - n
}

/// XOR and AND gates of the bit-vector circuit: `m·2^σ` and `(m−1)·2^σ`.
pub fn mbwa_formula(m: usize, sigma: u32) -> (u64, u64) {
    let u = 1u64 << sigma;
    (m as u64 * u, (m as u64 - 1) * u)
}

/// Per-stage AND counts of the sort-compare-shuffle circuit: generated
/// against the closed forms, with the published merge and compare formulas
/// wherever they apply.
pub fn analyze_mscs(
    m: usize,
    n: usize,
    width: usize,
    f: FunctionKind,
    variant: Variant,
) -> Result<Vec<StageRow>, ProtocolError> {
    let gen = measure_mscs(m, n, width, f, variant)?;
    let closed = mscs_counts(m, n, width, f, variant)?;
    let merge = merge_formula(m, n, width).unwrap_or(closed.merge);
    let compare = match f {
        FunctionKind::RevealShuffled => compare_formula(m, n, width),
        _ => closed.compare,
    };
    let mut rows = vec![
        StageRow { stage: "reconstruct-xor", generated: gen.reconstruct_xor, formula: closed.reconstruct_xor },
        StageRow { stage: "merge", generated: gen.merge, formula: merge },
        StageRow { stage: "compare", generated: gen.compare, formula: compare },
    ];
    match f {
        FunctionKind::RevealShuffled => {
            rows.push(StageRow { stage: "shuffle", generated: gen.shuffle, formula: closed.shuffle })
        }
        _ => rows.push(StageRow { stage: "popcount", generated: gen.tail, formula: closed.tail }),
    }
    let total = merge + compare + closed.shuffle + closed.tail;
    rows.push(StageRow { stage: "total-and", generated: gen.total_and(), formula: total });
    Ok(rows)
}

/// The merge stage alone: P1 supplies `m` ascending lists of `n` words,
/// list after list, and the outputs are the `m·n` merged words.
pub fn build_merge_circuit(m: usize, n: usize, width: usize) -> Result<Circuit, ProtocolError> {
    if m < 1 || n < 1 || width < 1 {
        return Err(ProtocolError::InvalidConfig("merge needs m, n, σ ≥ 1".into()));
    }
    let mut b = CircuitBuilder::new(m * n * width, 0);
    let lists: Vec<Vec<Word>> =
        (0..m).map(|l| (0..n).map(|j| Word::from_range((l * n + j) * width, width)).collect()).collect();
    let sorted = emit_merge_network(&mut b, &lists).expect("lists are rectangular");
    let outputs = sorted.into_iter().take(m * n).flat_map(Word::into_wires).collect();
    Ok(b.finish(outputs)?)
}

pub fn analyze_mbwa(m: usize, sigma: u32) -> Result<Vec<StageRow>, ProtocolError> {
    let CircuitStats { and_count, xor_count, .. } = build_mbwa(m, sigma)?.stats();
    let (xor, and) = mbwa_formula(m, sigma);
    Ok(vec![
        StageRow { stage: "xor", generated: xor_count, formula: xor },
        StageRow { stage: "and", generated: and_count, formula: and },
    ])
}

/// Plain against hashing-based totals, both in generated AND gates.
pub fn analyze_hashing(
    m: usize,
    n: u64,
    sigma: u32,
    gamma: f64,
    f: FunctionKind,
    variant: Variant,
) -> Result<HashingComparison, ProtocolError> {
    plain_vs_hashing(m, n, sigma, gamma, f, variant)
}

/// A published optimizer result for `m = 3`, `γ = 40`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceRow {
    pub log2n: u32,
    pub sigma: u32,
    pub b: f64,
    pub delta: f64,
    pub gates_per_element: f64,
}

const fn row(log2n: u32, sigma: u32, b: f64, delta: f64, gates_per_element: f64) -> ReferenceRow {
    ReferenceRow { log2n, sigma, b, delta, gates_per_element }
}

pub const REFERENCE_M: usize = 3;
pub const REFERENCE_GAMMA: f64 = 40.0;

pub const REFERENCE_ROWS: [ReferenceRow; 13] = [
    row(8, 12, 292.0, 0.82, 1470.0),
    row(8, 16, 292.0, 0.72, 1932.0),
    row(8, 20, 292.0, 0.67, 2387.0),
    row(12, 16, 316.0, 0.81, 1514.0),
    row(12, 20, 316.0, 0.71, 1983.0),
    row(12, 24, 316.0, 0.66, 2447.0),
    row(16, 20, 341.0, 0.80, 1554.0),
    row(16, 24, 341.0, 0.71, 2032.0),
    row(16, 28, 341.0, 0.65, 2503.0),
    row(24, 28, 389.0, 0.78, 1629.0),
    row(24, 32, 389.0, 0.69, 2121.0),
    row(32, 36, 438.0, 0.77, 1697.0),
    row(32, 40, 438.0, 0.68, 2201.0),
];

impl ReferenceRow {
    /// Whether `b > 3(log2 n + γ)/δ²` holds for the published `(b, δ)`.
    pub fn satisfies_constraint(&self, gamma: f64) -> bool {
        self.b > 3.0 * (self.log2n as f64 + gamma) / (self.delta * self.delta)
    }

    /// Whether `b ≤ n`, i.e. the row implies at least one bin.
    pub fn has_bins(&self) -> bool {
        self.b <= 2f64.powi(self.log2n as i32)
    }
}

pub fn reference_row(m: usize, log2n: u32, sigma: u32, gamma: f64) -> Option<ReferenceRow> {
    if m != REFERENCE_M || gamma != REFERENCE_GAMMA {
        return None;
    }
    REFERENCE_ROWS.iter().copied().find(|r| r.log2n == log2n && r.sigma == sigma)
}

/// Optimizer output with the matching reference row, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeReport {
    pub log2n: u32,
    pub params: OptimizedParams,
    pub reference: Option<ReferenceRow>,
}

impl OptimizeReport {
    /// Relative deviation of our per-record-pair cost from the reference.
    pub fn deviation(&self) -> Option<f64> {
        self.reference.map(|r| self.params.gates_per_record_pair() / r.gates_per_element - 1.0)
    }
}

pub fn optimize_report(m: usize, log2n: u32, sigma: u32, gamma: f64) -> Result<OptimizeReport, HashError> {
    if log2n >= 64 {
        return Err(HashError::Infeasible(format!("log2 n = {log2n} is too large")));
    }
    let params = optimize_params(m, 1u64 << log2n, sigma, gamma)?;
    Ok(OptimizeReport { log2n, params, reference: reference_row(m, log2n, sigma, gamma) })
}
