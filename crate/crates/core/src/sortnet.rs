//! k-bitonic merge network.
//!
//! The schedule is generated by the recursive k-bitonic sort: sort the even
//! and odd subsequences, compare-exchange adjacent pairs, then sweep strided
//! pairs `(2i + 1, 2i + 2s)` for strides `s = 2^(d-1), ..., 1`. Its length is
//! `(N/4)·log2(N)·log2(N/2) + N - 1` for every `k`.

use thiserror::Error;

use crate::bits;
use crate::circuit::GateSink;
use crate::gadgets::{sorter2, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SortError {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("list {list} is not sorted ascending")]
    UnsortedInput { list: usize },
    #[error("lists must all have length {expected}, list {list} has {got}")]
    RaggedLists { list: usize, expected: usize, got: usize },
    #[error("value {value:#x} does not fit below the all-ones sentinel of width {width}")]
    SentinelCollision { value: u64, width: usize },
}

/// Ordered compare-exchange pairs over positions `0..n`. Applying each pair
/// moves the minimum to `lo` and the maximum to `hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparatorSchedule {
    n: usize,
    k: usize,
    pairs: Vec<(usize, usize)>,
}

impl ComparatorSchedule {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Runs the schedule on plain values.
    pub fn apply<T: Ord>(&self, values: &mut [T]) {
        assert_eq!(values.len(), self.n);
        for &(lo, hi) in &self.pairs {
            if values[lo] > values[hi] {
                values.swap(lo, hi);
            }
        }
    }
}

fn check_pow2(n: usize) -> Result<(), SortError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(SortError::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Schedule sorting any `k`-bitonic sequence of length `n` ascending.
pub fn kbs_schedule(n: usize, k: usize) -> Result<ComparatorSchedule, SortError> {
    check_pow2(n)?;
    assert!(k >= 1, "k must be positive");
    let positions: Vec<usize> = (0..n).collect();
    let mut pairs = Vec::with_capacity(comparator_count(n)? as usize);
    kbs(&positions, k, &mut pairs);
    Ok(ComparatorSchedule { n, k, pairs })
}

fn kbs(pos: &[usize], k: usize, out: &mut Vec<(usize, usize)>) {
    let n = pos.len();
    if n == 1 {
        return;
    }
    let evens: Vec<usize> = pos.iter().copied().step_by(2).collect();
    let odds: Vec<usize> = pos.iter().copied().skip(1).step_by(2).collect();
    kbs(&evens, k, out);
    kbs(&odds, k, out);
    let half = n / 2;
    out.extend((0..half).map(|i| (pos[2 * i], pos[2 * i + 1])));
    let mut d = bits::ceil_log2(n as u64);
    if n <= 2 * k {
        d -= 1;
    }
    for t in 1..=d {
        let stride = 1usize << (d - t);
        if stride >= half {
            continue;
        }
        out.extend((0..half - stride).map(|i| (pos[2 * i + 1], pos[2 * i + 2 * stride])));
    }
}

/// `(n/4)·log2(n)·log2(n/2) + n - 1`.
pub fn comparator_count(n: usize) -> Result<u64, SortError> {
    check_pow2(n)?;
    if n == 1 {
        return Ok(0);
    }
    let n = n as u64;
    let l = n.trailing_zeros() as u64;
    Ok(n / 4 * l * (l - 1) + n - 1)
}

/// Shape of the network merging `m` sorted lists of `n` words each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MergePlan {
    pub m: usize,
    pub n: usize,
    /// Padded length: the next power of two at or above `m·n`.
    pub padded: usize,
    /// Number of bitonic runs after reversing every odd-indexed list.
    pub k: usize,
}

impl MergePlan {
    pub fn new(m: usize, n: usize) -> MergePlan {
        assert!(m >= 1 && n >= 1);
        MergePlan { m, n, padded: (m * n).next_power_of_two(), k: m.div_ceil(2) }
    }

    pub fn sentinels(&self) -> usize {
        self.padded - self.m * self.n
    }

    pub fn schedule(&self) -> ComparatorSchedule {
        kbs_schedule(self.padded, self.k).expect("padded length is a power of two")
    }

    /// AND gates of the emitted network for words of width `w`.
    pub fn and_count(&self, w: usize) -> u64 {
        2 * w as u64 * comparator_count(self.padded).expect("power of two")
    }

    /// Input order fed to the schedule: odd-indexed lists reversed, then
    /// sentinel padding. Entries are `Some((list, index))` or `None` for a sentinel.
    pub fn arrangement(&self) -> Vec<Option<(usize, usize)>> {
        let mut order = Vec::with_capacity(self.padded);
        for list in 0..self.m {
            if list % 2 == 1 {
                order.extend((0..self.n).rev().map(|i| Some((list, i))));
            } else {
                order.extend((0..self.n).map(|i| Some((list, i))));
            }
        }
        order.resize(self.padded, None);
        order
    }

    /// Plain-value model of the network; validates the inputs the circuit assumes.
    pub fn merge_plain(&self, lists: &[Vec<u64>], width: usize) -> Result<Vec<u64>, SortError> {
        assert_eq!(lists.len(), self.m);
        let sentinel = bits::ones(width);
        for (i, l) in lists.iter().enumerate() {
            if l.len() != self.n {
                return Err(SortError::RaggedLists { list: i, expected: self.n, got: l.len() });
            }
            if l.windows(2).any(|p| p[0] > p[1]) {
                return Err(SortError::UnsortedInput { list: i });
            }
            if let Some(&value) = l.iter().find(|&&v| v >= sentinel) {
                return Err(SortError::SentinelCollision { value, width });
            }
        }
        let mut seq: Vec<u64> = self
            .arrangement()
            .into_iter()
            .map(|slot| slot.map_or(sentinel, |(l, i)| lists[l][i]))
            .collect();
        self.schedule().apply(&mut seq);
        Ok(seq)
    }
}

/// Emits the merge network for `lists` (each sorted ascending, equal length
/// and width). Returns all padded positions in ascending order; the all-ones
/// sentinels occupy the tail.
pub fn emit_merge_network<S: GateSink + ?Sized>(
    sink: &mut S,
    lists: &[Vec<Word>],
) -> Result<Vec<Word>, SortError> {
    assert!(!lists.is_empty() && !lists[0].is_empty(), "nothing to merge");
    let n = lists[0].len();
    if let Some((i, l)) = lists.iter().enumerate().find(|(_, l)| l.len() != n) {
        return Err(SortError::RaggedLists { list: i, expected: n, got: l.len() });
    }
    let width = lists[0][0].width();
    let plan = MergePlan::new(lists.len(), n);
    let mut seq: Vec<Option<Word>> = Vec::with_capacity(plan.padded);
    let sentinel = (plan.sentinels() > 0).then(|| Word::constant(sink, bits::ones(width), width));
    for slot in plan.arrangement() {
        seq.push(Some(match slot {
            Some((l, i)) => lists[l][i].clone(),
            None => sentinel.clone().expect("sentinel exists when padding"),
        }));
    }
    for &(lo, hi) in plan.schedule().pairs() {
        let a = seq[lo].take().unwrap();
        let b = seq[hi].take().unwrap();
        let (min, max) = sorter2(sink, &a, &b).expect("uniform widths");
        seq[lo] = Some(min);
        seq[hi] = Some(max);
    }
    Ok(seq.into_iter().map(Option::unwrap).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, GateCounter, WireId};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schedule_examples() {
        assert_eq!(kbs_schedule(4, 1).unwrap().len(), 5);
        assert_eq!(kbs_schedule(8, 2).unwrap().len(), 19);
        assert!(kbs_schedule(1, 1).unwrap().is_empty());
        assert_eq!(kbs_schedule(6, 1), Err(SortError::NotPowerOfTwo(6)));
        assert_eq!(
            kbs_schedule(4, 1).unwrap().pairs(),
            &[(0, 2), (1, 3), (0, 1), (2, 3), (1, 2)]
        );
    }

    #[test]
    fn count_examples() {
        assert_eq!(comparator_count(4).unwrap(), 5);
        assert_eq!(comparator_count(8).unwrap(), 19);
        assert_eq!(comparator_count(16).unwrap(), 63);
        assert_eq!(comparator_count(12), Err(SortError::NotPowerOfTwo(12)));
    }

    #[test]
    fn schedule_length_matches_formula_for_every_k() {
        for e in 1..=7 {
            let n = 1usize << e;
            for k in 1..=n {
                assert_eq!(kbs_schedule(n, k).unwrap().len() as u64, comparator_count(n).unwrap());
            }
        }
    }

    #[test]
    fn pairs_are_ordered_and_in_range() {
        let s = kbs_schedule(64, 3).unwrap();
        assert!(s.pairs().iter().all(|&(lo, hi)| lo < hi && hi < 64));
    }

    fn merge_circuit(m: usize, n: usize, w: usize) -> crate::circuit::Circuit {
        let mut b = CircuitBuilder::new(m * n * w, 0);
        let lists: Vec<Vec<Word>> = (0..m)
            .map(|l| (0..n).map(|i| Word::from_range((l * n + i) * w, w)).collect())
            .collect();
        let out = emit_merge_network(&mut b, &lists).unwrap();
        b.finish(out.into_iter().flat_map(Word::into_wires).collect()).unwrap()
    }

    fn eval(c: &crate::circuit::Circuit, lists: &[Vec<u64>], w: usize) -> Vec<u64> {
        let inputs: Vec<bool> = lists.iter().flatten().flat_map(|&v| bits::to_bits(v, w)).collect();
        c.eval_plaintext(&inputs).unwrap().chunks(w).map(bits::from_bits).collect()
    }

    #[test]
    fn merges_two_lists() {
        let c = merge_circuit(2, 2, 4);
        assert_eq!(eval(&c, &[vec![1, 3], vec![2, 4]], 4), vec![1, 2, 3, 4]);
    }

    #[test]
    fn merges_with_padding() {
        let c = merge_circuit(3, 2, 4);
        let out = eval(&c, &[vec![1, 2], vec![2, 5], vec![2, 7]], 4);
        assert_eq!(&out[..6], &[1, 2, 2, 2, 5, 7]);
        assert_eq!(&out[6..], &[15, 15]);
    }

    #[test]
    fn and_count_matches_closed_form() {
        let c = merge_circuit(4, 4, 8);
        assert_eq!(c.stats().and_count, 1008);
        for (m, n) in [(2, 2), (3, 2), (3, 5), (4, 8), (5, 3)] {
            for w in [1, 3, 8] {
                let plan = MergePlan::new(m, n);
                let mut counter = GateCounter::new(m * n * w);
                let lists: Vec<Vec<Word>> = (0..m)
                    .map(|l| (0..n).map(|i| Word::from_range((l * n + i) * w, w)).collect())
                    .collect();
                emit_merge_network(&mut counter, &lists).unwrap();
                assert_eq!(counter.stats().and_count, plan.and_count(w));
            }
        }
    }

    #[test]
    fn plain_model_validates_inputs() {
        let plan = MergePlan::new(2, 2);
        assert_eq!(plan.merge_plain(&[vec![3, 1], vec![0, 2]], 4), Err(SortError::UnsortedInput { list: 0 }));
        assert_eq!(
            plan.merge_plain(&[vec![1, 15], vec![0, 2]], 4),
            Err(SortError::SentinelCollision { value: 15, width: 4 })
        );
        assert_eq!(plan.merge_plain(&[vec![1, 3], vec![0, 2]], 4).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn ragged_lists_are_rejected() {
        let mut b = CircuitBuilder::new(12, 0);
        let lists = vec![
            vec![Word::from_range(0, 4), Word::from_range(4, 4)],
            vec![Word::new(vec![WireId(8), WireId(9), WireId(10), WireId(11)])],
        ];
        assert_eq!(
            emit_merge_network(&mut b, &lists),
            Err(SortError::RaggedLists { list: 1, expected: 2, got: 1 })
        );
    }

    #[test]
    fn random_sorted_inputs_match_reference_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n, w) in [(2, 4, 8), (3, 4, 8), (5, 3, 6)] {
            let c = merge_circuit(m, n, w);
            for _ in 0..1000 {
                let lists: Vec<Vec<u64>> = (0..m)
                    .map(|_| {
                        let mut l: Vec<u64> = (0..n).map(|_| rng.gen_range(0..(1 << w) - 1)).collect();
                        l.sort();
                        l
                    })
                    .collect();
                let mut expected: Vec<u64> = lists.iter().flatten().copied().collect();
                expected.sort();
                let out = eval(&c, &lists, w);
                assert_eq!(&out[..m * n], &expected[..]);
                assert_eq!(MergePlan::new(m, n).merge_plain(&lists, w).unwrap(), out);
            }
        }
    }
}
