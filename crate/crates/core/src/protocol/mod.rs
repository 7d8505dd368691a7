//! m-party orchestration: sharing inputs to the two computing parties,
//! composing the per-mode circuits and interpreting their outputs.

mod circuits;
pub mod analysis;
pub mod net;
mod output;
mod plan;
mod setio;
mod sharing;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::circuit::CircuitError;
use crate::hashing::HashError;
use crate::twopc::TwoPcError;

pub use circuits::{
    build_hashing_mscs, build_mbwa, build_mscs, emit_mscs, mbwa_layout, measure_mscs, mscs_counts, mscs_layout,
    optimize_exact, plain_vs_hashing, HashingComparison, InputLayout, StageCounts,
};
pub use output::{interpret_output, sentinel_match_count, OutputSpec, ProtocolOutput};
pub use plan::{expected_output, party_rng, random_instance, run_local, session_seed, Backend, JobPlan, LocalRun};
pub use setio::{parse_set, read_set_file, write_result, write_result_file};
pub use sharing::{share_bitvector, share_sorted_set, share_words, ShareList, MAX_BITVECTOR_SIGMA};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("element {0:#x} appears more than once")]
    DuplicateElement(u64),
    #[error("element {value:#x} is outside the domain for σ = {sigma}")]
    DomainViolation { value: u64, sigma: u32 },
    #[error("a universe of 2^{0} elements is too large for bit-vector sharing")]
    UniverseTooLarge(u32),
    #[error("invalid variant: {0}")]
    InvalidVariant(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("party {party} holds {got} elements, expected {expected}")]
    SetSizeMismatch { party: usize, expected: usize, got: usize },
    #[error("malformed share: {0}")]
    MalformedShare(String),
    #[error("hash failure reported by a peer: {0}")]
    HashFailure(String),
    #[error("peer aborted: {0}")]
    PeerAborted(String),
    #[error("malformed output: {0}")]
    MalformedOutput(String),
    #[error("{path}:{line}: {msg}")]
    SetFile { path: String, line: usize, msg: String },
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    TwoPc(#[from] TwoPcError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A party's role in a session. Party indices are zero-based: P1 is party 0,
/// P2 is party 1, and `Dealer(i)` is party `i - 1` for `i` in `3..=m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PartyRole {
    P1,
    P2,
    Dealer(usize),
}

impl PartyRole {
    pub fn from_index(party: usize) -> PartyRole {
        match party {
            0 => PartyRole::P1,
            1 => PartyRole::P2,
            i => PartyRole::Dealer(i + 1),
        }
    }

    pub fn index(self) -> usize {
        match self {
            PartyRole::P1 => 0,
            PartyRole::P2 => 1,
            PartyRole::Dealer(i) => i - 1,
        }
    }

    pub fn is_computing(self) -> bool {
        !matches!(self, PartyRole::Dealer(_))
    }
}

impl fmt::Display for PartyRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyRole::P1 => f.write_str("p1"),
            PartyRole::P2 => f.write_str("p2"),
            PartyRole::Dealer(i) => write!(f, "dealer:{i}"),
        }
    }
}

impl FromStr for PartyRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "p1" => Ok(PartyRole::P1),
            "p2" => Ok(PartyRole::P2),
            _ => {
                let i = s
                    .strip_prefix("dealer:")
                    .and_then(|i| i.parse::<usize>().ok())
                    .ok_or_else(|| format!("unknown role `{s}` (expected p1, p2 or dealer:<i>)"))?;
                if i < 3 {
                    return Err(format!("dealer index must be at least 3, got {i}"));
                }
                Ok(PartyRole::Dealer(i))
            }
        }
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $kw:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn keyword(self) -> &'static str {
                match self { $($name::$variant => $kw),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.keyword())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($kw => Ok($name::$variant),)+
                    _ => Err(format!(
                        "unknown {} `{s}` (expected one of: {})",
                        stringify!($name),
                        [$($kw),+].join(", ")
                    )),
                }
            }
        }
    };
}

/// What the circuit reveals about the intersection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FunctionKind {
    RevealShuffled,
    Cardinality,
    BitVector,
}

keyword_enum!(FunctionKind { RevealShuffled => "reveal", Cardinality => "cardinality", BitVector => "bitvector" });

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Mbwa,
    Mscs,
    HashingMscs,
}

keyword_enum!(Mode { Mbwa => "mbwa", Mscs => "mscs", HashingMscs => "hashing-mscs" });

/// `PaperExact` reproduces the published gate counts; `Robust` adds an
/// indicator bit to revealed records and a flag bit to hashed records so
/// that zero values and dummies are unambiguous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    PaperExact,
    Robust,
}

keyword_enum!(Variant { PaperExact => "paper-exact", Robust => "robust" });

/// κ and λ. Only κ = 128 is supported by the garbling engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SecurityParams {
    pub kappa: u32,
    pub lambda: u32,
}

impl Default for SecurityParams {
    fn default() -> Self {
        SecurityParams { kappa: 128, lambda: 80 }
    }
}

/// Bin parameters for hashing-mSCS: either searched from γ or given.
#[derive(Clone, Debug, PartialEq)]
pub struct HashSettings {
    pub gamma: f64,
    pub beta: Option<u64>,
    pub capacity: Option<usize>,
    pub f_seed: u64,
}

impl Default for HashSettings {
    fn default() -> Self {
        HashSettings { gamma: 40.0, beta: None, capacity: None, f_seed: 0x6d70_7369 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionConfig {
    pub m: usize,
    pub n: usize,
    pub sigma: u32,
    pub f: FunctionKind,
    pub mode: Mode,
    pub variant: Variant,
    pub hash: HashSettings,
    pub security: SecurityParams,
}

impl SessionConfig {
    pub fn new(m: usize, n: usize, sigma: u32, mode: Mode, f: FunctionKind) -> SessionConfig {
        SessionConfig {
            m,
            n,
            sigma,
            f,
            mode,
            variant: Variant::Robust,
            hash: HashSettings::default(),
            security: SecurityParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::InvalidConfig(msg));
        if self.m < 3 {
            return bad(format!("m = {} but at least 3 parties are required", self.m));
        }
        if self.n < 1 {
            return bad("n must be at least 1".into());
        }
        if !(2..=63).contains(&self.sigma) {
            return bad(format!("σ = {} outside 2..=63", self.sigma));
        }
        if self.security.kappa != 128 {
            return bad(format!("κ = {} is unsupported (only 128)", self.security.kappa));
        }
        match (self.mode, self.f) {
            (Mode::Mbwa, FunctionKind::BitVector) => {
                if self.sigma > MAX_BITVECTOR_SIGMA {
                    return Err(ProtocolError::UniverseTooLarge(self.sigma));
                }
            }
            (Mode::Mbwa, f) => return bad(format!("mbwa computes bitvector, not {f}")),
            (_, FunctionKind::BitVector) => return bad(format!("{} cannot compute bitvector", self.mode)),
            _ => {}
        }
        if self.mode == Mode::HashingMscs && self.variant == Variant::PaperExact {
            return Err(ProtocolError::InvalidVariant(
                "hashing-mscs runs only in the robust variant; paper-exact is analysis-only".into(),
            ));
        }
        if self.mode == Mode::HashingMscs && !(self.hash.gamma > 0.0) {
            return bad(format!("γ = {} must be positive", self.hash.gamma));
        }
        Ok(())
    }

    /// Largest admissible element.
    pub fn max_element(&self) -> u64 {
        crate::bits::ones(self.sigma as usize) - 1
    }

    /// Checks one party's set against the domain and size rules of the mode.
    pub fn check_set(&self, party: usize, set: &[u64]) -> Result<(), ProtocolError> {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(ProtocolError::DuplicateElement(w[0]));
        }
        if let Some(&value) = sorted.iter().find(|&&x| x > self.max_element()) {
            return Err(ProtocolError::DomainViolation { value, sigma: self.sigma });
        }
        if self.variant == Variant::PaperExact && self.mode == Mode::Mscs && sorted.first() == Some(&0) {
            return Err(ProtocolError::DomainViolation { value: 0, sigma: self.sigma });
        }
        let size_ok = match self.mode {
            Mode::Mbwa => true,
            Mode::Mscs => set.len() == self.n,
            Mode::HashingMscs => set.len() <= self.n,
        };
        if !size_ok {
            return Err(ProtocolError::SetSizeMismatch { party, expected: self.n, got: set.len() });
        }
        Ok(())
    }
}
