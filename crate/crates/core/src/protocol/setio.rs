use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::{ProtocolError, ProtocolOutput};
use crate::bits;

const CARDINALITY_HEADER: &str = "# cardinality:";

fn parse_element(tok: &str) -> Option<u64> {
    match tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => tok.parse().ok(),
    }
}

/// Parses a set file: one element per line, decimal or `0x` hex. Blank lines
/// and `#` comments are skipped. `origin` names the source in errors.
pub fn parse_set(text: &str, sigma: u32, origin: &str) -> Result<Vec<u64>, ProtocolError> {
    let max = bits::ones(sigma as usize) - 1;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| ProtocolError::SetFile { path: origin.to_owned(), line: i + 1, msg };
        let v = parse_element(line).ok_or_else(|| err(format!("`{line}` is not a number")))?;
        if v > max {
            return Err(err(format!("{v} is outside [0, {max}]")));
        }
        if !seen.insert(v) {
            return Err(err(format!("duplicate element {v}")));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn read_set_file(path: &Path, sigma: u32) -> Result<Vec<u64>, ProtocolError> {
    let text = std::fs::read_to_string(path)?;
    parse_set(&text, sigma, &path.display().to_string())
}

/// Text form of a result. Cardinality results carry only the header line.
pub fn write_result(out: &ProtocolOutput) -> String {
    let mut s = String::new();
    match out {
        ProtocolOutput::Cardinality(c) => writeln!(s, "{CARDINALITY_HEADER} {c}").unwrap(),
        ProtocolOutput::Elements(e) => {
            for x in e {
                writeln!(s, "{x}").unwrap();
            }
        }
    }
    s
}

pub fn write_result_file(path: &Path, out: &ProtocolOutput) -> Result<(), ProtocolError> {
    Ok(std::fs::write(path, write_result(out))?)
}

impl ProtocolOutput {
    /// Inverse of [`write_result`].
    pub fn parse(text: &str) -> Result<ProtocolOutput, ProtocolError> {
        if let Some(rest) = text.trim_start().strip_prefix(CARDINALITY_HEADER) {
            let c = rest.trim().parse().map_err(|_| ProtocolError::MalformedOutput(format!("bad header `{rest}`")))?;
            return Ok(ProtocolOutput::Cardinality(c));
        }
        parse_set(text, 64, "result").map(|mut e| {
            e.sort_unstable();
            ProtocolOutput::Elements(e)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_hex_and_comments() {
        let s = parse_set("# header\n5\n0x1f\n\n  7  \n", 8, "x").unwrap();
        assert_eq!(s, vec![5, 31, 7]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [("1\n2\n2\n", 3), ("1\nzz\n", 2), ("\n\n255\n", 3)];
        for (text, line) in cases {
            match parse_set(text, 8, "in.txt") {
                Err(ProtocolError::SetFile { line: l, ref path, .. }) => {
                    assert_eq!((l, path.as_str()), (line, "in.txt"));
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn results_round_trip() {
        for r in [ProtocolOutput::Cardinality(12), ProtocolOutput::Elements(vec![1, 40, 77]), ProtocolOutput::Elements(vec![])] {
            assert_eq!(ProtocolOutput::parse(&write_result(&r)).unwrap(), r);
        }
        assert_eq!(write_result(&ProtocolOutput::Cardinality(3)), "# cardinality: 3\n");
    }
}
