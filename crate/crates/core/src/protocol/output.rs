use super::{FunctionKind, ProtocolError, Variant};
use crate::bits;

/// The result a session delivers to every party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProtocolOutput {
    /// Intersection elements, ascending.
    Elements(Vec<u64>),
    Cardinality(u64),
}

impl ProtocolOutput {
    /// Combines per-bin results: elements are united, counts added.
    pub fn union(parts: impl IntoIterator<Item = ProtocolOutput>) -> Result<ProtocolOutput, ProtocolError> {
        let mut elements: Option<Vec<u64>> = None;
        let mut count: Option<u64> = None;
        for p in parts {
            match p {
                ProtocolOutput::Elements(e) => elements.get_or_insert_with(Vec::new).extend(e),
                ProtocolOutput::Cardinality(c) => *count.get_or_insert(0) += c,
            }
        }
        match (elements, count) {
            (Some(mut e), None) => {
                e.sort_unstable();
                e.dedup();
                Ok(ProtocolOutput::Elements(e))
            }
            (None, Some(c)) => Ok(ProtocolOutput::Cardinality(c)),
            (None, None) => Err(ProtocolError::MalformedOutput("no results to combine".into())),
            (Some(_), Some(_)) => Err(ProtocolError::MalformedOutput("mixed result kinds".into())),
        }
    }

    pub fn cardinality(&self) -> u64 {
        match self {
            ProtocolOutput::Elements(e) => e.len() as u64,
            ProtocolOutput::Cardinality(c) => *c,
        }
    }
}

/// Shape of a circuit's output bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputSpec {
    pub f: FunctionKind,
    pub variant: Variant,
    /// Revealed records (`n`), or the universe size for a bit-vector.
    pub records: usize,
    /// Value width of each record.
    pub width: usize,
    /// Public count of windows that match only sentinels.
    pub sentinel_matches: u64,
}

impl OutputSpec {
    pub fn expected_bits(&self) -> usize {
        match self.f {
            FunctionKind::BitVector => self.records,
            FunctionKind::RevealShuffled => self.records * (self.width + (self.variant == Variant::Robust) as usize),
            FunctionKind::Cardinality => bits::ceil_log2(self.records as u64 + 1) as usize,
        }
    }
}

/// Decodes raw circuit outputs. Revealed records that are dummies (zero
/// value in the paper-exact variant, clear indicator in the robust one) or
/// sentinels are dropped.
pub fn interpret_output(spec: &OutputSpec, raw: &[bool]) -> Result<ProtocolOutput, ProtocolError> {
    if raw.len() != spec.expected_bits() {
        return Err(ProtocolError::MalformedOutput(format!(
            "expected {} output bits, got {}",
            spec.expected_bits(),
            raw.len()
        )));
    }
    match spec.f {
        FunctionKind::BitVector => Ok(ProtocolOutput::Elements(
            raw.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect(),
        )),
        FunctionKind::RevealShuffled => {
            let sentinel = bits::ones(spec.width);
            let robust = spec.variant == Variant::Robust;
            let mut out: Vec<u64> = raw
                .chunks(spec.width + robust as usize)
                .filter_map(|r| match robust {
                    true => r[0].then(|| bits::from_bits(&r[1..])),
                    false => Some(bits::from_bits(r)).filter(|&v| v != 0),
                })
                .filter(|&v| v != sentinel)
                .collect();
            out.sort_unstable();
            Ok(ProtocolOutput::Elements(out))
        }
        FunctionKind::Cardinality => {
            let raw_count = bits::from_bits(raw);
            raw_count
                .checked_sub(spec.sentinel_matches)
                .map(ProtocolOutput::Cardinality)
                .ok_or_else(|| ProtocolError::MalformedOutput(format!("count {raw_count} below sentinel matches")))
        }
    }
}

/// Windows of the compare stage that could report a run made only of the
/// padding sentinels, found by walking the window starts over the padded
/// sequence. Windows only reach the first `m·n` sorted positions while the
/// sentinels sort after every real word.
pub fn sentinel_match_count(m: usize, n: usize) -> u64 {
    let real = m * n;
    let padded = real.next_power_of_two();
    (0..n)
        .filter(|&j| {
            let starts = if j + 1 == n { m * j..m * j + 1 } else { m * j..m * j + m };
            starts.into_iter().any(|s| s >= real && s + m <= padded)
        })
        .count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(f: FunctionKind, variant: Variant, records: usize, width: usize) -> OutputSpec {
        OutputSpec { f, variant, records, width, sentinel_matches: 0 }
    }

    fn bits_of(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn bitvector_output() {
        let s = spec(FunctionKind::BitVector, Variant::Robust, 8, 1);
        assert_eq!(interpret_output(&s, &bits_of("00010000")).unwrap(), ProtocolOutput::Elements(vec![3]));
    }

    #[test]
    fn reveal_filters_dummies_and_sentinels() {
        let s = spec(FunctionKind::RevealShuffled, Variant::PaperExact, 4, 4);
        let raw = bits_of("0000010100001111");
        assert_eq!(interpret_output(&s, &raw).unwrap(), ProtocolOutput::Elements(vec![5]));
        let s = spec(FunctionKind::RevealShuffled, Variant::Robust, 3, 4);
        // A matched zero, a dummy, then a matched 6.
        let raw = bits_of("100000010110110");
        assert_eq!(interpret_output(&s, &raw).unwrap(), ProtocolOutput::Elements(vec![0, 6]));
    }

    #[test]
    fn cardinality_subtracts_sentinel_matches() {
        let mut s = spec(FunctionKind::Cardinality, Variant::Robust, 4, 8);
        s.sentinel_matches = 1;
        assert_eq!(interpret_output(&s, &bits_of("011")).unwrap(), ProtocolOutput::Cardinality(2));
        s.sentinel_matches = 4;
        assert!(interpret_output(&s, &bits_of("011")).is_err());
        assert!(interpret_output(&s, &bits_of("0011")).is_err());
    }

    #[test]
    fn sentinels_never_match() {
        for m in 2..9 {
            for n in 1..40 {
                assert_eq!(sentinel_match_count(m, n), 0);
            }
        }
    }

    #[test]
    fn union_of_bins() {
        let u = ProtocolOutput::union([ProtocolOutput::Elements(vec![9, 2]), ProtocolOutput::Elements(vec![4])]);
        assert_eq!(u.unwrap(), ProtocolOutput::Elements(vec![2, 4, 9]));
        let c = ProtocolOutput::union([ProtocolOutput::Cardinality(2), ProtocolOutput::Cardinality(3)]);
        assert_eq!(c.unwrap(), ProtocolOutput::Cardinality(5));
        assert!(ProtocolOutput::union([]).is_err());
    }
}
