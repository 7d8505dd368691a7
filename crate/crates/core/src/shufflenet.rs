//! Waksman permutation networks and the two-party oblivious shuffle.
//!
//! Networks of arbitrary size use the recursive decomposition into an upper
//! half of `floor(n/2)` lanes and a lower half of `ceil(n/2)` lanes. The last
//! output switch is omitted for even `n`, giving `n·log2(n) - n + 1` switches
//! at powers of two.
//!
//! Control bits are ordered: input column, upper subnetwork, lower
//! subnetwork, output column. A switch with control `0` passes straight
//! through; the all-zero assignment realizes the identity.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::circuit::{GateSink, WireId};
use crate::gadgets::{cond_swap, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShuffleError {
    #[error("not a permutation: {0}")]
    InvalidPermutation(String),
    #[error("records have differing widths")]
    WidthMismatch,
    #[error("expected {expected} control bits, got {got}")]
    ControlLength { expected: usize, got: usize },
}

/// A permutation in gather form: applying it yields `out[j] = items[p[j]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Permutation, ShuffleError> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            match seen.get_mut(x) {
                None => return Err(ShuffleError::InvalidPermutation(format!("index {x} out of range"))),
                Some(true) => return Err(ShuffleError::InvalidPermutation(format!("index {x} repeated"))),
                Some(s) => *s = true,
            }
        }
        Ok(Permutation(map))
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(rng);
        Permutation(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.0.len());
        self.0.iter().map(|&i| items[i].clone()).collect()
    }

    /// Permutation equal to applying `self` and then `next`.
    pub fn then(&self, next: &Permutation) -> Permutation {
        Permutation(next.0.iter().map(|&j| self.0[j]).collect())
    }
}

/// Number of switches (and control bits) in the network for `n` lanes.
pub fn switch_count(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let h = n / 2;
    let outputs = if n.is_multiple_of(2) { h - 1 } else { h };
    h + outputs + switch_count(h) + switch_count(n - h)
}

/// Runs the network over `items`, pulling one control per switch and
/// combining each switch's two inputs with `swap`.
pub fn apply_network<T, C>(
    items: Vec<T>,
    controls: &mut impl Iterator<Item = C>,
    swap: &mut impl FnMut(C, T, T) -> (T, T),
) -> Vec<T> {
    let n = items.len();
    if n <= 1 {
        return items;
    }
    let h = n / 2;
    let mut upper = Vec::with_capacity(h);
    let mut lower = Vec::with_capacity(n - h);
    let mut it = items.into_iter();
    for _ in 0..h {
        let (a, b) = (it.next().unwrap(), it.next().unwrap());
        let (u, l) = swap(controls.next().expect("control bits exhausted"), a, b);
        upper.push(u);
        lower.push(l);
    }
    lower.extend(it);
    let upper = apply_network(upper, controls, swap);
    let lower = apply_network(lower, controls, swap);

    let mut out = Vec::with_capacity(n);
    let mut lower = lower.into_iter();
    for (i, u) in upper.into_iter().enumerate() {
        let l = lower.next().unwrap();
        if n.is_multiple_of(2) && i == h - 1 {
            out.push(u);
            out.push(l);
        } else {
            let (a, b) = swap(controls.next().expect("control bits exhausted"), u, l);
            out.push(a);
            out.push(b);
        }
    }
    out.extend(lower);
    out
}

/// Control bits realizing `perm` (looping algorithm).
pub fn waksman_route(perm: &Permutation) -> Vec<bool> {
    let mut out = Vec::with_capacity(switch_count(perm.len()));
    route(perm.as_slice(), &mut out);
    out
}

fn route(perm: &[usize], out: &mut Vec<bool>) {
    let n = perm.len();
    if n <= 1 {
        return;
    }
    let h = n / 2;
    let odd = n % 2 == 1;
    let mut inv = vec![0; n];
    for (j, &x) in perm.iter().enumerate() {
        inv[x] = j;
    }
    let partner = |x: usize| (x < 2 * h).then_some(x ^ 1);

    // `true` sends an input through the lower subnetwork.
    let mut lower: Vec<Option<bool>> = vec![None; n];
    let walk = |mut x: usize, side: bool, lower: &mut Vec<Option<bool>>| loop {
        lower[x] = Some(side);
        let Some(j) = partner(inv[x]) else { break };
        let y = perm[j];
        if lower[y].is_some() {
            break;
        }
        lower[y] = Some(!side);
        let Some(next) = partner(y) else { break };
        if lower[next].is_some() {
            break;
        }
        x = next;
    };
    // Pinned lanes: the unpaired last input (odd n) and the last output,
    // which always comes from the lower half.
    if odd {
        walk(n - 1, true, &mut lower);
    } else {
        walk(perm[n - 1], true, &mut lower);
    }
    for x in 0..n {
        if lower[x].is_none() {
            walk(x, false, &mut lower);
        }
    }
    let lower: Vec<bool> = lower.into_iter().map(Option::unwrap).collect();

    let sub_index = |x: usize| if x < 2 * h { x / 2 } else { h };
    let mut upper_perm = Vec::with_capacity(h);
    let mut lower_perm = Vec::with_capacity(n - h);
    let mut out_ctrl = Vec::with_capacity(h);
    for i in 0..h {
        let (a, b) = (perm[2 * i], perm[2 * i + 1]);
        let crossed = lower[a];
        let (u, l) = if crossed { (b, a) } else { (a, b) };
        debug_assert!(!lower[u] && lower[l]);
        upper_perm.push(sub_index(u));
        lower_perm.push(sub_index(l));
        if !(n.is_multiple_of(2) && i == h - 1) {
            out_ctrl.push(crossed);
        } else {
            debug_assert!(!crossed);
        }
    }
    if odd {
        lower_perm.push(sub_index(perm[n - 1]));
    }

    out.extend((0..h).map(|i| lower[2 * i]));
    route(&upper_perm, out);
    route(&lower_perm, out);
    out.extend(out_ctrl);
}

/// Where a switch input comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Port {
    Input(usize),
    Switch { index: usize, side: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Switch {
    pub inputs: [Port; 2],
    /// Longest switch path from the network inputs, counting this switch.
    pub layer: usize,
}

/// Static description of the network for `n` lanes, switches in control order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchLayout {
    pub n: usize,
    pub switches: Vec<Switch>,
}

impl SwitchLayout {
    pub fn new(n: usize) -> SwitchLayout {
        let mut switches = Vec::with_capacity(switch_count(n));
        let items: Vec<(Port, usize)> = (0..n).map(|i| (Port::Input(i), 0)).collect();
        let mut controls = std::iter::repeat(());
        apply_network(items, &mut controls, &mut |(), (pa, la): (Port, usize), (pb, lb)| {
            let index = switches.len();
            let layer = la.max(lb) + 1;
            switches.push(Switch { inputs: [pa, pb], layer });
            ((Port::Switch { index, side: 0 }, layer), (Port::Switch { index, side: 1 }, layer))
        });
        SwitchLayout { n, switches }
    }

    pub fn control_count(&self) -> usize {
        self.switches.len()
    }

    pub fn depth(&self) -> usize {
        self.switches.iter().map(|s| s.layer).max().unwrap_or(0)
    }
}

/// Applies the network programmed by plain control bits.
pub fn permute_plain<T>(items: Vec<T>, controls: &[bool]) -> Vec<T> {
    assert_eq!(controls.len(), switch_count(items.len()));
    apply_network(items, &mut controls.iter().copied(), &mut |c, a, b| if c { (b, a) } else { (a, b) })
}

/// Emits one Waksman network driven by control wires.
pub fn emit_network<S: GateSink + ?Sized>(
    sink: &mut S,
    records: &[Word],
    controls: &[WireId],
) -> Result<Vec<Word>, ShuffleError> {
    let expected = switch_count(records.len());
    if controls.len() != expected {
        return Err(ShuffleError::ControlLength { expected, got: controls.len() });
    }
    if records.windows(2).any(|p| p[0].width() != p[1].width()) {
        return Err(ShuffleError::WidthMismatch);
    }
    Ok(apply_network(records.to_vec(), &mut controls.iter().copied(), &mut |c, a: Word, b: Word| {
        cond_swap(sink, c, &a, &b).expect("uniform widths")
    }))
}

/// Two cascaded networks: the first programmed by `c1` (P1's private
/// input), the second by `c2` (P2's). Neither party alone knows the
/// composed permutation.
pub fn emit_double_shuffle<S: GateSink + ?Sized>(
    sink: &mut S,
    records: &[Word],
    c1: &[WireId],
    c2: &[WireId],
) -> Result<Vec<Word>, ShuffleError> {
    let mid = emit_network(sink, records, c1)?;
    emit_network(sink, &mid, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits;
    use crate::circuit::CircuitBuilder;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn two_lane_examples() {
        assert_eq!(waksman_route(&Permutation::identity(2)), vec![false]);
        assert_eq!(waksman_route(&Permutation::new(vec![1, 0]).unwrap()), vec![true]);
    }

    #[test]
    fn switch_counts() {
        for e in 1..=8u32 {
            let n = 1usize << e;
            assert_eq!(switch_count(n), n * e as usize - n + 1);
        }
        assert_eq!(switch_count(1), 0);
        assert_eq!(switch_count(3), 3);
        assert_eq!(SwitchLayout::new(4).control_count(), 5);
        assert_eq!(SwitchLayout::new(8).depth(), 5);
    }

    #[test]
    fn invalid_permutations_are_rejected() {
        assert!(matches!(Permutation::new(vec![0, 0]), Err(ShuffleError::InvalidPermutation(_))));
        assert!(matches!(Permutation::new(vec![0, 2]), Err(ShuffleError::InvalidPermutation(_))));
    }

    #[test]
    fn identity_routes_to_all_zero() {
        for n in 1..=40 {
            assert!(waksman_route(&Permutation::identity(n)).iter().all(|&c| !c), "n={n}");
        }
    }

    #[test]
    fn four_lanes_route_every_permutation() {
        let perms = all_perms(4);
        assert_eq!(perms.len(), 24);
        for p in perms {
            let perm = Permutation::new(p).unwrap();
            let ctrl = waksman_route(&perm);
            assert_eq!(ctrl.len(), 5);
            assert_eq!(permute_plain((0..4).collect(), &ctrl), perm.as_slice());
        }
    }

    #[test]
    fn random_large_permutations_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [9usize, 16, 31, 64, 100, 257] {
            for _ in 0..20 {
                let perm = Permutation::random(n, &mut rng);
                let items: Vec<usize> = (0..n).collect();
                assert_eq!(permute_plain(items, &waksman_route(&perm)), perm.as_slice());
            }
        }
    }

    fn shuffle_circuit(n: usize, w: usize) -> crate::circuit::Circuit {
        let sw = switch_count(n);
        let mut b = CircuitBuilder::new(n * w + sw, sw);
        let records: Vec<Word> = (0..n).map(|i| Word::from_range(i * w, w)).collect();
        let c1: Vec<WireId> = (0..sw).map(|i| b.p1_input(n * w + i)).collect();
        let c2: Vec<WireId> = (0..sw).map(|i| b.p2_input(i)).collect();
        let out = emit_double_shuffle(&mut b, &records, &c1, &c2).unwrap();
        b.finish(out.into_iter().flat_map(Word::into_wires).collect()).unwrap()
    }

    fn run_shuffle(c: &crate::circuit::Circuit, records: &[u64], w: usize, c1: &[bool], c2: &[bool]) -> Vec<u64> {
        let mut inputs: Vec<bool> = records.iter().flat_map(|&v| bits::to_bits(v, w)).collect();
        inputs.extend_from_slice(c1);
        inputs.extend_from_slice(c2);
        c.eval_plaintext(&inputs).unwrap().chunks(w).map(bits::from_bits).collect()
    }

    #[test]
    fn double_shuffle_examples() {
        let c = shuffle_circuit(4, 13);
        assert_eq!(c.stats().and_count, 130);
        let recs = [11, 22, 33, 44];
        let zero = vec![false; 5];
        assert_eq!(run_shuffle(&c, &recs, 13, &zero, &zero), recs.to_vec());
        let rev = waksman_route(&Permutation::new(vec![3, 2, 1, 0]).unwrap());
        assert_eq!(run_shuffle(&c, &recs, 13, &rev, &zero), vec![44, 33, 22, 11]);
    }

    #[test]
    fn composition_matches_permutation_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (n, w) = (7, 5);
        let c = shuffle_circuit(n, w);
        let recs: Vec<u64> = (0..n as u64).map(|i| i * 3 + 1).collect();
        for _ in 0..500 {
            let p1 = Permutation::random(n, &mut rng);
            let p2 = Permutation::random(n, &mut rng);
            let out = run_shuffle(&c, &recs, w, &waksman_route(&p1), &waksman_route(&p2));
            assert_eq!(out, p1.then(&p2).apply(&recs));
        }
    }

    #[test]
    fn composed_shuffle_is_uniform_at_three() {
        let perms: Vec<Permutation> = all_perms(3).into_iter().map(|p| Permutation::new(p).unwrap()).collect();
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for p1 in &perms {
            for p2 in &perms {
                let mid = permute_plain((0..3).collect(), &waksman_route(p1));
                let out = permute_plain(mid, &waksman_route(p2));
                *counts.entry(out).or_default() += 1;
            }
        }
        assert_eq!(counts.len(), 6);
        assert!(counts.values().all(|&c| c == 6));
    }

    #[test]
    fn control_length_is_checked() {
        let mut b = CircuitBuilder::new(8, 0);
        let recs: Vec<Word> = (0..4).map(|i| Word::from_range(i * 2, 2)).collect();
        assert_eq!(
            emit_network(&mut b, &recs, &[WireId(0)]),
            Err(ShuffleError::ControlLength { expected: 5, got: 1 })
        );
        let mixed = vec![Word::from_range(0, 2), Word::from_range(2, 3)];
        assert_eq!(emit_network(&mut b, &mixed, &[WireId(0)]), Err(ShuffleError::WidthMismatch));
    }
}
