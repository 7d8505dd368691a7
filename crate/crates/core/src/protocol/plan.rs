use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

use super::{
    build_mbwa, build_mscs, interpret_output, mbwa_layout, mscs_layout, optimize_exact, sentinel_match_count,
    share_bitvector, share_sorted_set, share_words, FunctionKind, InputLayout, Mode, OutputSpec, ProtocolError,
    ProtocolOutput, SessionConfig, ShareList, Variant,
};
use crate::circuit::Circuit;
use crate::hashing::{build_bins, unhash, BinLayout};
use crate::shufflenet::{waksman_route, Permutation};
use crate::twopc::{cleartext_session, run_loopback, CommStats, SessionParams};

/// Everything both computing parties and every dealer derive from the
/// public configuration: bin layout, circuit input layout and output shape.
#[derive(Clone, Debug)]
pub struct JobPlan {
    pub config: SessionConfig,
    /// Present for hashing-mSCS only.
    pub layout: Option<BinLayout>,
    pub input: InputLayout,
    pub spec: OutputSpec,
    pub bins: usize,
}

impl JobPlan {
    pub fn new(config: &SessionConfig) -> Result<JobPlan, ProtocolError> {
        config.validate()?;
        let (m, n, sigma) = (config.m, config.n, config.sigma);
        let plan = match config.mode {
            Mode::Mbwa => JobPlan {
                config: config.clone(),
                layout: None,
                input: mbwa_layout(m, sigma),
                spec: OutputSpec {
                    f: FunctionKind::BitVector,
                    variant: config.variant,
                    records: 1 << sigma,
                    width: 1,
                    sentinel_matches: 0,
                },
                bins: 1,
            },
            Mode::Mscs => JobPlan {
                config: config.clone(),
                layout: None,
                input: mscs_layout(m, n, sigma as usize, config.f),
                spec: OutputSpec {
                    f: config.f,
                    variant: config.variant,
                    records: n,
                    width: sigma as usize,
                    sentinel_matches: sentinel_match_count(m, n),
                },
                bins: 1,
            },
            Mode::HashingMscs => {
                let layout = resolve_layout(config)?;
                let width = layout.record_width();
                let cap = layout.capacity;
                let beta = layout.beta as usize;
                JobPlan {
                    config: config.clone(),
                    layout: Some(layout),
                    input: mscs_layout(m, cap, width, config.f),
                    spec: OutputSpec {
                        f: config.f,
                        variant: Variant::Robust,
                        records: cap,
                        width,
                        sentinel_matches: sentinel_match_count(m, cap),
                    },
                    bins: beta,
                }
            }
        };
        Ok(plan)
    }

    /// The circuit evaluated in every bin.
    pub fn build_circuit(&self) -> Result<Circuit, ProtocolError> {
        let c = &self.config;
        match c.mode {
            Mode::Mbwa => build_mbwa(c.m, c.sigma),
            Mode::Mscs | Mode::HashingMscs => {
                build_mscs(c.m, self.input.words, self.input.width, c.f, self.spec.variant)
            }
        }
    }

    /// Digest of the public job parameters. Parties refuse to cooperate
    /// unless their digests agree.
    pub fn digest(&self) -> [u8; 32] {
        let c = &self.config;
        let mut text = format!(
            "m={};n={};sigma={};mode={};f={};variant={};words={};width={};controls={};bins={}",
            c.m,
            c.n,
            c.sigma,
            c.mode,
            c.f,
            c.variant,
            self.input.words,
            self.input.width,
            self.input.controls,
            self.bins
        );
        if let Some(l) = &self.layout {
            text.push_str(&format!(";beta={};capacity={};fseed={}", l.beta, l.capacity, l.f_seed));
        }
        Sha256::digest(text.as_bytes()).into()
    }

    /// Shares one party's set, per bin. Each entry is (P1's half, P2's half).
    pub fn share_party<R: RngCore + ?Sized>(
        &self,
        party: usize,
        set: &[u64],
        rng: &mut R,
    ) -> Result<Vec<(ShareList, ShareList)>, ProtocolError> {
        let c = &self.config;
        c.check_set(party, set)?;
        Ok(match c.mode {
            Mode::Mbwa => vec![share_bitvector(set, c.sigma, rng)?],
            Mode::Mscs => vec![share_sorted_set(set, c.sigma, rng)?],
            Mode::HashingMscs => {
                let layout = self.layout.as_ref().expect("hashing plan has a layout");
                let table = build_bins(set, layout, party)?;
                table.bins.iter().map(|records| share_words(records, self.input.width, rng)).collect()
            }
        })
    }

    /// Fresh shuffle controls for each bin (empty unless elements are revealed).
    pub fn draw_controls<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<Vec<bool>> {
        (0..self.bins)
            .map(|_| match self.input.controls {
                0 => Vec::new(),
                _ => waksman_route(&Permutation::random(self.input.words, rng)),
            })
            .collect()
    }

    /// Checks that a received share list fits this plan.
    pub fn check_share(&self, list: &ShareList) -> Result<(), ProtocolError> {
        if list.len() != self.input.words || list.width != self.input.width {
            return Err(ProtocolError::MalformedShare(format!(
                "{} words of {} bits, expected {} of {}",
                list.len(),
                list.width,
                self.input.words,
                self.input.width
            )));
        }
        Ok(())
    }

    /// Decodes the raw output bits of every bin into the final result.
    pub fn decode(&self, per_bin: &[Vec<bool>]) -> Result<ProtocolOutput, ProtocolError> {
        if per_bin.len() != self.bins {
            return Err(ProtocolError::MalformedOutput(format!("{} bin outputs for {} bins", per_bin.len(), self.bins)));
        }
        let parts = per_bin.iter().enumerate().map(|(bin, raw)| {
            let out = interpret_output(&self.spec, raw)?;
            match (&self.layout, out) {
                (Some(layout), ProtocolOutput::Elements(records)) => {
                    let f = layout.round_function();
                    records
                        .into_iter()
                        .map(|r| {
                            layout.decode_record(r).map(|s| unhash(bin as u64, s, layout, &f)).ok_or_else(|| {
                                ProtocolError::MalformedOutput(format!("dummy record {r:#x} revealed in bin {bin}"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()
                        .map(ProtocolOutput::Elements)
                }
                (_, out) => Ok(out),
            }
        });
        ProtocolOutput::union(parts.collect::<Result<Vec<_>, _>>()?)
    }
}

fn resolve_layout(config: &SessionConfig) -> Result<BinLayout, ProtocolError> {
    let h = &config.hash;
    match (h.beta, h.capacity) {
        (Some(beta), Some(capacity)) => Ok(BinLayout::new(config.m, beta, capacity, config.sigma, h.f_seed)?),
        (None, None) => {
            let p = optimize_exact(config.m, config.n as u64, config.sigma, h.gamma, config.f, Variant::Robust)?;
            Ok(p.layout(h.f_seed)?)
        }
        _ => Err(ProtocolError::InvalidConfig("beta and capacity must be given together".into())),
    }
}

/// Deterministic per-party randomness derived from a run seed.
pub fn party_rng(seed: u64, party: usize) -> ChaCha12Rng {
    let digest = Sha256::new()
        .chain_update(b"mpsi party rng")
        .chain_update(seed.to_be_bytes())
        .chain_update((party as u64).to_be_bytes())
        .finalize();
    ChaCha12Rng::from_seed(digest.into())
}

/// Seed for one party's randomness in one bin's session.
pub fn session_seed(seed: u64, party: usize, bin: usize) -> u64 {
    let digest = Sha256::new()
        .chain_update(b"mpsi session")
        .chain_update(seed.to_be_bytes())
        .chain_update((party as u64).to_be_bytes())
        .chain_update((bin as u64).to_be_bytes())
        .finalize();
    u64::from_be_bytes(digest[..8].try_into().unwrap())
}

/// Reference result computed in the clear.
pub fn expected_output(config: &SessionConfig, sets: &[Vec<u64>]) -> ProtocolOutput {
    let mut common: Vec<u64> = sets.first().cloned().unwrap_or_default();
    common.sort_unstable();
    common.dedup();
    common.retain(|x| sets[1..].iter().all(|s| s.contains(x)));
    match config.f {
        FunctionKind::Cardinality => ProtocolOutput::Cardinality(common.len() as u64),
        _ => ProtocolOutput::Elements(common),
    }
}

/// Random sets for `config`: every party holds `n` distinct in-domain
/// elements and a random number of them are common to all parties.
pub fn random_instance<R: Rng + ?Sized>(config: &SessionConfig, rng: &mut R) -> Vec<Vec<u64>> {
    let (m, n) = (config.m, config.n);
    let lo = u64::from(config.variant == Variant::PaperExact && config.mode == Mode::Mscs);
    let universe = config.max_element() - lo + 1;
    let common = rng.gen_range(0..=n);
    let needed = common + (n - common) * m;
    assert!(needed as u64 <= universe, "universe of {universe} values cannot hold {needed} distinct elements");
    let mut values: Vec<u64> = if universe <= 1 << 22 {
        rand::seq::index::sample(rng, universe as usize, needed).into_iter().map(|v| v as u64 + lo).collect()
    } else {
        let mut seen = HashSet::with_capacity(needed);
        while seen.len() < needed {
            seen.insert(rng.gen_range(lo..=config.max_element()));
        }
        seen.into_iter().collect()
    };
    values.shuffle(rng);
    let (shared, rest) = values.split_at(common);
    let own = n - common;
    (0..m)
        .map(|party| {
            let mut s = shared.to_vec();
            s.extend_from_slice(&rest[party * own..(party + 1) * own]);
            s.shuffle(rng);
            s
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Evaluates the circuit directly on the joint input.
    Cleartext,
    /// Garbles every bin over a loopback TCP connection.
    Garbled(SessionParams),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRun {
    pub output: ProtocolOutput,
    /// Summed over bins, as seen by the garbler.
    pub garbler_stats: CommStats,
    pub evaluator_stats: CommStats,
    pub bins: usize,
    pub and_gates: u64,
}

/// Runs a whole session inside this process: every party shares its set,
/// then each bin's circuit is evaluated by the chosen backend.
pub fn run_local(
    config: &SessionConfig,
    sets: &[Vec<u64>],
    backend: Backend,
    seed: u64,
    workers: usize,
) -> Result<LocalRun, ProtocolError> {
    let plan = JobPlan::new(config)?;
    if sets.len() != config.m {
        return Err(ProtocolError::InvalidConfig(format!("{} sets for m = {}", sets.len(), config.m)));
    }
    let mut shares = Vec::with_capacity(sets.len());
    for (party, set) in sets.iter().enumerate() {
        shares.push(plan.share_party(party, set, &mut party_rng(seed, party))?);
    }
    let controls1 = plan.draw_controls(&mut party_rng(seed, 0));
    let controls2 = plan.draw_controls(&mut party_rng(seed, 1));
    let circuit = Arc::new(plan.build_circuit()?);
    let and_gates = circuit.stats().and_count;

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<(Vec<bool>, CommStats, CommStats)>>> = Mutex::new(vec![None; plan.bins]);
    let first_error: Mutex<Option<ProtocolError>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, plan.bins) {
            s.spawn(|| loop {
                let bin = next.fetch_add(1, Ordering::Relaxed);
                if bin >= plan.bins || first_error.lock().unwrap().is_some() {
                    break;
                }
                let p1: Vec<&ShareList> = shares.iter().map(|s| &s[bin].0).collect();
                let p2: Vec<&ShareList> = shares.iter().map(|s| &s[bin].1).collect();
                let in1 = plan.input.assemble(&p1, &controls1[bin]);
                let in2 = plan.input.assemble(&p2, &controls2[bin]);
                let r = match backend {
                    Backend::Cleartext => {
                        let joint = [in1, in2].concat();
                        cleartext_session(&circuit, &joint).map(|o| (o, CommStats::default(), CommStats::default()))
                    }
                    Backend::Garbled(params) => {
                        let params = SessionParams { bin: bin as u32, ..params };
                        run_loopback(circuit.clone(), in1, in2, params, session_seed(seed, 0, bin))
                    }
                };
                match r {
                    Ok(r) => results.lock().unwrap()[bin] = Some(r),
                    Err(e) => {
                        first_error.lock().unwrap().get_or_insert(e.into());
                    }
                }
            });
        }
    });
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let mut garbler_stats = CommStats::default();
    let mut evaluator_stats = CommStats::default();
    let mut outputs = Vec::with_capacity(plan.bins);
    for r in results.into_inner().unwrap() {
        let (out, g, e) = r.expect("every bin ran");
        garbler_stats.absorb(&g);
        evaluator_stats.absorb(&e);
        outputs.push(out);
    }
    Ok(LocalRun { output: plan.decode(&outputs)?, garbler_stats, evaluator_stats, bins: plan.bins, and_gates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::HashSettings;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn random_sets(m: usize, n: usize, sigma: u32, common: usize, rng: &mut impl Rng) -> Vec<Vec<u64>> {
        let max = (1u64 << sigma) - 2;
        let mut pool: Vec<u64> = (1..=max).collect();
        pool.shuffle(rng);
        let shared = &pool[..common];
        let mut rest = pool[common..].iter();
        (0..m)
            .map(|_| {
                let mut s = shared.to_vec();
                s.extend(rest.by_ref().take(n - common));
                s.shuffle(rng);
                s
            })
            .collect()
    }

    #[test]
    fn cleartext_modes_match_reference() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for (mode, f) in [
            (Mode::Mscs, FunctionKind::RevealShuffled),
            (Mode::Mscs, FunctionKind::Cardinality),
            (Mode::Mbwa, FunctionKind::BitVector),
            (Mode::HashingMscs, FunctionKind::RevealShuffled),
            (Mode::HashingMscs, FunctionKind::Cardinality),
        ] {
            let mut cfg = SessionConfig::new(3, 6, 8, mode, f);
            if mode == Mode::HashingMscs {
                cfg.hash = HashSettings { beta: Some(2), capacity: Some(6), ..HashSettings::default() };
            }
            let sets = random_sets(3, 6, 8, 2, &mut rng);
            let run = run_local(&cfg, &sets, Backend::Cleartext, 9, 2).unwrap();
            assert_eq!(run.output, expected_output(&cfg, &sets), "{mode} {f}");
        }
    }

    #[test]
    fn garbled_matches_cleartext() {
        let cfg = SessionConfig::new(3, 4, 6, Mode::Mscs, FunctionKind::RevealShuffled);
        let sets = vec![vec![1, 2, 3, 4], vec![2, 3, 5, 6], vec![3, 2, 9, 10]];
        let params = SessionParams { ot: crate::twopc::OtMode::Extension, ..SessionParams::default() };
        let run = run_local(&cfg, &sets, Backend::Garbled(params), 1, 1).unwrap();
        assert_eq!(run.output, ProtocolOutput::Elements(vec![2, 3]));
        assert!(run.garbler_stats.tables.sent > 0);
    }

    #[test]
    fn bin_overflow_is_reported() {
        let mut cfg = SessionConfig::new(3, 6, 8, Mode::HashingMscs, FunctionKind::Cardinality);
        cfg.hash = HashSettings { beta: Some(4), capacity: Some(1), ..HashSettings::default() };
        let sets = vec![vec![1, 2, 3, 4, 5, 6]; 3];
        let r = run_local(&cfg, &sets, Backend::Cleartext, 0, 1);
        assert!(matches!(r, Err(ProtocolError::Hash(crate::hashing::HashError::BinOverflow { .. }))), "{r:?}");
    }

    #[test]
    fn random_instances_are_valid() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut cfg = SessionConfig::new(4, 8, 6, Mode::Mscs, FunctionKind::RevealShuffled);
            cfg.variant = Variant::PaperExact;
            let sets = random_instance(&cfg, &mut rng);
            assert_eq!(sets.len(), 4);
            for (i, s) in sets.iter().enumerate() {
                cfg.check_set(i, s).unwrap();
            }
        }
        let big = SessionConfig::new(3, 4, 40, Mode::Mscs, FunctionKind::Cardinality);
        assert!(random_instance(&big, &mut rng).iter().all(|s| s.len() == 4));
    }

    #[test]
    fn digest_tracks_parameters() {
        let a = JobPlan::new(&SessionConfig::new(3, 4, 8, Mode::Mscs, FunctionKind::Cardinality)).unwrap();
        let b = JobPlan::new(&SessionConfig::new(3, 4, 9, Mode::Mscs, FunctionKind::Cardinality)).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), a.clone().digest());
    }
}
