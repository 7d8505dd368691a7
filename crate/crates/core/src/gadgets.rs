//! Fixed-width sub-circuits used by the sort, compare and shuffle stages.
//!
//! All gadgets emit into a caller-owned [`GateSink`]. AND counts per gadget
//! for width `w` and party count `m`:
//!
//! | gadget              | AND gates      |
//! |---------------------|----------------|
//! | `comparator_gt`     | `w`            |
//! | `cond_swap`         | `w`            |
//! | `sorter2`           | `2w`           |
//! | `equality`          | `w - 1`        |
//! | `select_masked`     | `w`            |
//! | `dup_select_window` | `(m + 1)w - 1` |
//! | `dup_select_final`  | `2w - 1`       |

use thiserror::Error;

use crate::bits;
use crate::circuit::{GateSink, WireId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GadgetError {
    #[error("word widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("window needs {expected} words, got {got}")]
    WrongWindowSize { expected: usize, got: usize },
}

/// A fixed-width unsigned value in a circuit, most significant wire first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word(Vec<WireId>);

impl Word {
    pub fn new(wires: Vec<WireId>) -> Word {
        assert!(!wires.is_empty(), "words are at least one bit wide");
        Word(wires)
    }

    /// `width` consecutive wires starting at `first`.
    pub fn from_range(first: usize, width: usize) -> Word {
        Word::new((first..first + width).map(|i| WireId(i as u32)).collect())
    }

    /// A word of constant wires.
    pub fn constant<S: GateSink + ?Sized>(sink: &mut S, value: u64, width: usize) -> Word {
        Word::new(bits::to_bits(value, width).into_iter().map(|b| sink.constant(b)).collect())
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn wires(&self) -> &[WireId] {
        &self.0
    }

    pub fn into_wires(self) -> Vec<WireId> {
        self.0
    }

    /// Least-significant bit first.
    fn lsb_first(&self) -> impl Iterator<Item = WireId> + '_ {
        self.0.iter().rev().copied()
    }
}

fn same_width(a: &Word, b: &Word) -> Result<(), GadgetError> {
    if a.width() != b.width() {
        return Err(GadgetError::WidthMismatch(a.width(), b.width()));
    }
    Ok(())
}

/// `1` iff `a > b` as unsigned integers.
///
/// Carry chain from the least significant bit:
/// `c' = x ^ ((x ^ c) & (y ^ c))`, which keeps `c` when `x == y` and takes
/// `x` otherwise. The first step has `c = 0` and reduces to `x & !y`.
pub fn comparator_gt<S: GateSink + ?Sized>(sink: &mut S, a: &Word, b: &Word) -> Result<WireId, GadgetError> {
    same_width(a, b)?;
    let mut pairs = a.lsb_first().zip(b.lsb_first());
    let (x0, y0) = pairs.next().expect("non-empty word");
    let both = sink.and(x0, y0);
    let mut carry = sink.xor(x0, both);
    for (x, y) in pairs {
        let xc = sink.xor(x, carry);
        let yc = sink.xor(y, carry);
        let t = sink.and(xc, yc);
        carry = sink.xor(x, t);
    }
    Ok(carry)
}

/// `(a, b)` when `c = 0`, `(b, a)` when `c = 1`.
pub fn cond_swap<S: GateSink + ?Sized>(
    sink: &mut S,
    c: WireId,
    a: &Word,
    b: &Word,
) -> Result<(Word, Word), GadgetError> {
    same_width(a, b)?;
    let mut lo = Vec::with_capacity(a.width());
    let mut hi = Vec::with_capacity(a.width());
    for (&x, &y) in a.wires().iter().zip(b.wires()) {
        let d = sink.xor(x, y);
        let t = sink.and(c, d);
        lo.push(sink.xor(x, t));
        hi.push(sink.xor(y, t));
    }
    Ok((Word(lo), Word(hi)))
}

/// Compare-exchange: returns `(min, max)`.
pub fn sorter2<S: GateSink + ?Sized>(sink: &mut S, a: &Word, b: &Word) -> Result<(Word, Word), GadgetError> {
    let gt = comparator_gt(sink, a, b)?;
    cond_swap(sink, gt, a, b)
}

/// AND of all wires via a balanced tree (`len - 1` gates).
pub fn and_all<S: GateSink + ?Sized>(sink: &mut S, wires: &[WireId]) -> WireId {
    fold_tree(wires, &mut |x, y| sink.and(x, y))
}

/// OR of all wires (`len - 1` AND gates).
pub fn or_all<S: GateSink + ?Sized>(sink: &mut S, wires: &[WireId]) -> WireId {
    fold_tree(wires, &mut |x, y| sink.or(x, y))
}

fn fold_tree(wires: &[WireId], op: &mut impl FnMut(WireId, WireId) -> WireId) -> WireId {
    assert!(!wires.is_empty());
    let mut level = wires.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            next.push(if pair.len() == 2 { op(pair[0], pair[1]) } else { pair[0] });
        }
        level = next;
    }
    level[0]
}

/// `1` iff `a == b`: free XNORs followed by an AND tree.
pub fn equality<S: GateSink + ?Sized>(sink: &mut S, a: &Word, b: &Word) -> Result<WireId, GadgetError> {
    same_width(a, b)?;
    let xnors: Vec<WireId> = a
        .wires()
        .iter()
        .zip(b.wires())
        .map(|(&x, &y)| {
            let d = sink.xor(x, y);
            sink.inv(d)
        })
        .collect();
    Ok(and_all(sink, &xnors))
}

/// `v` when `c = 1`, all zeros otherwise.
pub fn select_masked<S: GateSink + ?Sized>(sink: &mut S, c: WireId, v: &Word) -> Word {
    Word(v.wires().iter().map(|&x| sink.and(c, x)).collect())
}

/// Output of a duplicate-selection circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub indicator: WireId,
    pub value: Word,
}

/// Detects a run of `m` equal values starting in the first `m` positions of a
/// sorted window of `2m - 1` words.
///
/// In a sorted sequence `e[i] == e[i + m - 1]` already implies every element
/// in between is equal, so `m` strided equality tests cover all run starts.
/// Any such run covers position `m - 1`, which is therefore the value
/// selected when the indicator is set.
pub fn dup_select_window<S: GateSink + ?Sized>(
    sink: &mut S,
    elems: &[Word],
    m: usize,
) -> Result<Selection, GadgetError> {
    assert!(m >= 2, "duplicate selection needs at least two parties");
    if elems.len() != 2 * m - 1 {
        return Err(GadgetError::WrongWindowSize { expected: 2 * m - 1, got: elems.len() });
    }
    let eqs = (0..m)
        .map(|i| equality(sink, &elems[i], &elems[i + m - 1]))
        .collect::<Result<Vec<_>, _>>()?;
    let indicator = or_all(sink, &eqs);
    let value = select_masked(sink, indicator, &elems[m - 1]);
    Ok(Selection { indicator, value })
}

/// Tail of the compare stage: the last `m` positions form a run or not.
pub fn dup_select_final<S: GateSink + ?Sized>(
    sink: &mut S,
    elems: &[Word],
    m: usize,
) -> Result<Selection, GadgetError> {
    assert!(m >= 2, "duplicate selection needs at least two parties");
    if elems.len() != m {
        return Err(GadgetError::WrongWindowSize { expected: m, got: elems.len() });
    }
    let indicator = equality(sink, &elems[0], &elems[m - 1])?;
    let value = select_masked(sink, indicator, &elems[0]);
    Ok(Selection { indicator, value })
}

/// Number of set indicator bits, as a word of width `ceil(log2(len + 1))`.
pub fn popcount_tail<S: GateSink + ?Sized>(sink: &mut S, indicators: &[WireId]) -> Word {
    assert!(!indicators.is_empty(), "popcount of nothing");
    let width = bits::ceil_log2(indicators.len() as u64 + 1) as usize;
    // Numbers are kept least-significant bit first while adding.
    let mut level: Vec<Vec<WireId>> = indicators.iter().map(|&w| vec![w]).collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            next.push(match pair {
                [a, b] => ripple_add(sink, a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            });
        }
        level = next;
    }
    let mut sum = level.pop().unwrap();
    // Bits above `width` are always zero since the sum never exceeds len.
    sum.truncate(width);
    while sum.len() < width {
        sum.push(sink.constant(false));
    }
    sum.reverse();
    Word(sum)
}

/// LSB-first addition; the result is one bit wider than the longer operand.
fn ripple_add<S: GateSink + ?Sized>(sink: &mut S, a: &[WireId], b: &[WireId]) -> Vec<WireId> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = Vec::with_capacity(long.len() + 1);
    let mut carry: Option<WireId> = None;
    for (i, &x) in long.iter().enumerate() {
        let (s, c) = match (short.get(i).copied(), carry) {
            (Some(y), Some(c)) => {
                let xy = sink.xor(x, y);
                let s = sink.xor(xy, c);
                let xc = sink.xor(x, c);
                let yc = sink.xor(y, c);
                let t = sink.and(xc, yc);
                (s, sink.xor(c, t))
            }
            (Some(y), None) | (None, Some(y)) => (sink.xor(x, y), sink.and(x, y)),
            (None, None) => (x, sink.constant(false)),
        };
        out.push(s);
        carry = Some(c);
    }
    out.push(carry.expect("non-empty operand"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;

    /// Builds a circuit over `k` input words of width `w`, evaluates it on
    /// `values` and returns the output bits plus the AND count.
    fn run(
        w: usize,
        values: &[u64],
        f: impl FnOnce(&mut CircuitBuilder, &[Word]) -> Vec<WireId>,
    ) -> (Vec<bool>, u64) {
        let mut b = CircuitBuilder::new(w * values.len(), 0);
        let words: Vec<Word> = (0..values.len()).map(|i| Word::from_range(i * w, w)).collect();
        let outs = f(&mut b, &words);
        let c = b.finish(outs).unwrap();
        let inputs: Vec<bool> = values.iter().flat_map(|&v| bits::to_bits(v, w)).collect();
        (c.eval_plaintext(&inputs).unwrap(), c.stats().and_count)
    }

    fn ands(w: usize, k: usize, f: impl FnOnce(&mut CircuitBuilder, &[Word]) -> Vec<WireId>) -> u64 {
        run(w, &vec![0; k], f).1
    }

    #[test]
    fn comparator_examples() {
        let gt = |a, b| run(4, &[a, b], |s, w| vec![comparator_gt(s, &w[0], &w[1]).unwrap()]).0[0];
        assert!(gt(9, 3));
        assert!(!gt(3, 9));
        assert!(!gt(7, 7));
        assert_eq!(ands(8, 2, |s, w| vec![comparator_gt(s, &w[0], &w[1]).unwrap()]), 8);
    }

    #[test]
    fn cond_swap_examples() {
        let swap = |c: u64, a, b| {
            let out = run(4, &[a, b, c], |s, w| {
                let c = w[2].wires()[3];
                let (x, y) = cond_swap(s, c, &w[0], &w[1]).unwrap();
                [x.into_wires(), y.into_wires()].concat()
            })
            .0;
            (bits::from_bits(&out[..4]), bits::from_bits(&out[4..]))
        };
        assert_eq!(swap(0, 5, 2), (5, 2));
        assert_eq!(swap(1, 5, 2), (2, 5));
        let n = ands(8, 3, |s, w| {
            let (x, y) = cond_swap(s, w[2].wires()[0], &w[0], &w[1]).unwrap();
            [x.into_wires(), y.into_wires()].concat()
        });
        assert_eq!(n, 8);
    }

    #[test]
    fn sorter2_examples() {
        let sort = |a, b| {
            let out = run(4, &[a, b], |s, w| {
                let (x, y) = sorter2(s, &w[0], &w[1]).unwrap();
                [x.into_wires(), y.into_wires()].concat()
            })
            .0;
            (bits::from_bits(&out[..4]), bits::from_bits(&out[4..]))
        };
        assert_eq!(sort(7, 3), (3, 7));
        assert_eq!(sort(4, 4), (4, 4));
        let n = ands(4, 2, |s, w| {
            let (x, y) = sorter2(s, &w[0], &w[1]).unwrap();
            [x.into_wires(), y.into_wires()].concat()
        });
        assert_eq!(n, 8);
    }

    #[test]
    fn equality_and_select_examples() {
        let eq = |a, b| run(8, &[a, b], |s, w| vec![equality(s, &w[0], &w[1]).unwrap()]).0[0];
        assert!(eq(0xFF, 0xFF));
        assert!(!eq(0, 1));
        assert!(run(4, &[0xA, 0xA], |s, w| vec![equality(s, &w[0], &w[1]).unwrap()]).0[0]);
        assert_eq!(ands(12, 2, |s, w| vec![equality(s, &w[0], &w[1]).unwrap()]), 11);

        let sel = |c| {
            bits::from_bits(
                &run(8, &[0xAB, c], |s, w| select_masked(s, w[1].wires()[7], &w[0]).into_wires()).0,
            )
        };
        assert_eq!(sel(1), 0xAB);
        assert_eq!(sel(0), 0);
        assert_eq!(ands(20, 2, |s, w| select_masked(s, w[1].wires()[0], &w[0]).into_wires()), 20);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let mut b = CircuitBuilder::new(7, 0);
        let a = Word::from_range(0, 4);
        let c = Word::from_range(4, 3);
        assert_eq!(comparator_gt(&mut b, &a, &c), Err(GadgetError::WidthMismatch(4, 3)));
        assert_eq!(equality(&mut b, &a, &c), Err(GadgetError::WidthMismatch(4, 3)));
        assert!(sorter2(&mut b, &a, &c).is_err());
        assert!(cond_swap(&mut b, WireId(0), &a, &c).is_err());
    }

    fn window(m: usize, vals: &[u64], w: usize) -> (bool, u64) {
        let out = run(w, vals, |s, ws| {
            let sel = if vals.len() == m {
                dup_select_final(s, ws, m).unwrap()
            } else {
                dup_select_window(s, ws, m).unwrap()
            };
            [vec![sel.indicator], sel.value.into_wires()].concat()
        })
        .0;
        (out[0], bits::from_bits(&out[1..]))
    }

    #[test]
    fn duplicate_selection_examples() {
        assert_eq!(window(3, &[1, 2, 2, 2, 3], 4), (true, 2));
        assert_eq!(window(3, &[1, 2, 3, 4, 5], 4), (false, 0));
        assert_eq!(window(3, &[7, 7, 7], 4), (true, 7));
        assert_eq!(window(3, &[7, 7, 8], 4), (false, 0));
        assert_eq!(ands(4, 5, |s, w| dup_select_window(s, w, 3).unwrap().value.into_wires()), 15);
        assert_eq!(ands(12, 3, |s, w| dup_select_final(s, w, 3).unwrap().value.into_wires()), 23);
        let mut b = CircuitBuilder::new(16, 0);
        let words: Vec<Word> = (0..4).map(|i| Word::from_range(4 * i, 4)).collect();
        assert_eq!(
            dup_select_window(&mut b, &words, 3),
            Err(GadgetError::WrongWindowSize { expected: 5, got: 4 })
        );
        assert_eq!(
            dup_select_final(&mut b, &words, 3),
            Err(GadgetError::WrongWindowSize { expected: 3, got: 4 })
        );
    }

    #[test]
    fn popcount_examples() {
        let count = |ind: &[u64]| {
            let out = run(1, ind, |s, w| {
                let wires: Vec<WireId> = w.iter().map(|x| x.wires()[0]).collect();
                popcount_tail(s, &wires).into_wires()
            })
            .0;
            (bits::from_bits(&out), out.len())
        };
        assert_eq!(count(&[1, 0, 1, 1]), (3, 3));
        assert_eq!(count(&[0, 0, 0]), (0, 2));
        assert_eq!(count(&[1; 8]), (8, 4));
        assert_eq!(count(&[1]), (1, 1));
    }

    /// Every assignment at small widths against integer arithmetic.
    #[test]
    fn exhaustive_small_widths() {
        for w in 1..=4usize {
            let max = 1u64 << w;
            for a in 0..max {
                for b in 0..max {
                    let out = run(w, &[a, b], |s, ws| {
                        let gt = comparator_gt(s, &ws[0], &ws[1]).unwrap();
                        let eq = equality(s, &ws[0], &ws[1]).unwrap();
                        let (lo, hi) = sorter2(s, &ws[0], &ws[1]).unwrap();
                        [vec![gt, eq], lo.into_wires(), hi.into_wires()].concat()
                    })
                    .0;
                    assert_eq!(out[0], a > b);
                    assert_eq!(out[1], a == b);
                    assert_eq!(bits::from_bits(&out[2..2 + w]), a.min(b));
                    assert_eq!(bits::from_bits(&out[2 + w..]), a.max(b));
                    for c in 0..2u64 {
                        let out = run(w, &[a, b, c], |s, ws| {
                            let cw = ws[2].wires()[w - 1];
                            let (x, y) = cond_swap(s, cw, &ws[0], &ws[1]).unwrap();
                            let m = select_masked(s, cw, &ws[0]);
                            [x.into_wires(), y.into_wires(), m.into_wires()].concat()
                        })
                        .0;
                        let (x, y) = if c == 1 { (b, a) } else { (a, b) };
                        assert_eq!(bits::from_bits(&out[..w]), x);
                        assert_eq!(bits::from_bits(&out[w..2 * w]), y);
                        assert_eq!(bits::from_bits(&out[2 * w..]), if c == 1 { a } else { 0 });
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_gate_counts() {
        for w in 2..=32usize {
            let w64 = w as u64;
            assert_eq!(ands(w, 2, |s, x| vec![comparator_gt(s, &x[0], &x[1]).unwrap()]), w64);
            assert_eq!(
                ands(w, 3, |s, x| {
                    let (a, b) = cond_swap(s, x[2].wires()[0], &x[0], &x[1]).unwrap();
                    [a.into_wires(), b.into_wires()].concat()
                }),
                w64
            );
            assert_eq!(
                ands(w, 2, |s, x| {
                    let (a, b) = sorter2(s, &x[0], &x[1]).unwrap();
                    [a.into_wires(), b.into_wires()].concat()
                }),
                2 * w64
            );
            assert_eq!(ands(w, 2, |s, x| vec![equality(s, &x[0], &x[1]).unwrap()]), w64 - 1);
            assert_eq!(ands(w, 2, |s, x| select_masked(s, x[1].wires()[0], &x[0]).into_wires()), w64);
            for m in [2usize, 3, 5] {
                let mm = m as u64;
                let n = ands(w, 2 * m - 1, |s, x| {
                    let sel = dup_select_window(s, x, m).unwrap();
                    [vec![sel.indicator], sel.value.into_wires()].concat()
                });
                assert_eq!(n, (mm + 1) * w64 - 1);
                let n = ands(w, m, |s, x| dup_select_final(s, x, m).unwrap().value.into_wires());
                assert_eq!(n, 2 * w64 - 1);
            }
        }
    }

    /// Brute force over all sorted windows on a small alphabet: the indicator
    /// fires iff some run of `m` equal values starts in the first `m`
    /// positions, and then the value is that run's element.
    #[test]
    fn window_soundness_on_sorted_inputs() {
        fn sorted_windows(len: usize, alphabet: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if prefix.len() == len {
                out.push(prefix.clone());
                return;
            }
            let start = prefix.last().copied().unwrap_or(0);
            for v in start..alphabet {
                prefix.push(v);
                sorted_windows(len, alphabet, prefix, out);
                prefix.pop();
            }
        }
        for m in [2usize, 3, 4] {
            let mut all = Vec::new();
            sorted_windows(2 * m - 1, 4, &mut Vec::new(), &mut all);
            for win in all {
                let run_start = (0..m).find(|&s| win[s..s + m].iter().all(|&v| v == win[s]));
                let (ind, val) = window(m, &win, 2);
                assert_eq!(ind, run_start.is_some(), "{win:?}");
                match run_start {
                    Some(s) => assert_eq!(val, win[s]),
                    None => assert_eq!(val, 0),
                }
            }
        }
    }
}
