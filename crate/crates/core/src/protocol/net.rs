//! Multi-process execution over TCP.
//!
//! P1 listens for everybody. P2 listens for the dealers and connects to P1
//! once for control and once per bin session. Every setup connection opens
//! with HELLO and the job digest in a CIRC_HASH frame. Input parties then
//! send one SHARE frame per bin to each computing party, P1 and P2 run the
//! per-bin garbled sessions, and both send the textual result to every
//! dealer in a RESULT frame. A party that cannot continue sends ABORT on all
//! of its connections; a reason starting with [`HASH_FAILURE`] marks a bin
//! overflow.

use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::plan::{party_rng, session_seed, JobPlan};
use super::{write_result, PartyRole, ProtocolError, ProtocolOutput, SessionConfig, ShareList};
use crate::circuit::Circuit;
use crate::hashing::HashError;
use crate::twopc::{
    read_hello, run_session, run_session_with_hello, Channel, CommStats, Hello, MsgType, SessionParams, Side,
    TwoPcError, PROTOCOL_VERSION,
};

/// ABORT reason prefix for hash-table overflow.
pub const HASH_FAILURE: &str = "hash failure";
/// Bin id carried by HELLO on setup connections.
pub const CONTROL_BIN: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct NetOptions {
    pub role: PartyRole,
    /// Peers to dial: P1's address for P2; P1 then P2 for a dealer.
    pub connect: Vec<String>,
    pub session: SessionParams,
    pub seed: u64,
    pub workers: usize,
    /// Limit for establishing connections.
    pub timeout: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetReport {
    pub output: ProtocolOutput,
    pub stats: CommStats,
    pub bins: usize,
}

/// Binds `addr` and runs the party. Dealers pass `None`.
pub fn run_party(
    config: &SessionConfig,
    opts: &NetOptions,
    listen: Option<&str>,
    set: &[u64],
) -> Result<NetReport, ProtocolError> {
    let listener = listen.map(TcpListener::bind).transpose()?;
    run_party_on(config, opts, listener, set)
}

/// Like [`run_party`] with an already bound listener.
pub fn run_party_on(
    config: &SessionConfig,
    opts: &NetOptions,
    listener: Option<TcpListener>,
    set: &[u64],
) -> Result<NetReport, ProtocolError> {
    let plan = JobPlan::new(config)?;
    if config.m > u8::MAX as usize {
        return Err(ProtocolError::InvalidConfig(format!("m = {} exceeds the wire limit of 255", config.m)));
    }
    if let PartyRole::Dealer(i) = opts.role {
        if i > config.m {
            return Err(ProtocolError::InvalidConfig(format!("dealer:{i} but m = {}", config.m)));
        }
    }
    let need_listener = opts.role.is_computing();
    let need_peers = match opts.role {
        PartyRole::P1 => 0,
        PartyRole::P2 => 1,
        PartyRole::Dealer(_) => 2,
    };
    if need_listener != listener.is_some() {
        return Err(ProtocolError::InvalidConfig(format!("{} {} a listen address", opts.role, match need_listener {
            true => "needs",
            false => "does not take",
        })));
    }
    if opts.connect.len() != need_peers {
        return Err(ProtocolError::InvalidConfig(format!(
            "{} dials {need_peers} peer(s), got {}",
            opts.role,
            opts.connect.len()
        )));
    }
    match opts.role {
        PartyRole::Dealer(_) => run_dealer(&plan, opts, set),
        _ => Computing::new(&plan, opts, listener.unwrap())?.run(set),
    }
}

fn role_code(role: PartyRole) -> u8 {
    (role.index() + 1) as u8
}

fn hello_for(role: PartyRole) -> Hello {
    Hello { version: PROTOCOL_VERSION, kappa: 128, role: role_code(role), bin: CONTROL_BIN }
}

fn check_hello(h: &Hello) -> Result<(), ProtocolError> {
    if h.version != PROTOCOL_VERSION || h.kappa != 128 || h.bin != CONTROL_BIN {
        return Err(TwoPcError::HandshakeMismatch(format!("unexpected setup hello {h:?}")).into());
    }
    Ok(())
}

/// Maps an ABORT from a peer onto the error this party reports.
fn peer_error(e: TwoPcError) -> ProtocolError {
    match e {
        TwoPcError::Aborted(r) if r.starts_with(HASH_FAILURE) => ProtocolError::HashFailure(r),
        TwoPcError::Aborted(r) => ProtocolError::PeerAborted(r),
        e => e.into(),
    }
}

/// The ABORT reason announcing one of our own errors.
fn abort_reason(role: PartyRole, e: &ProtocolError) -> String {
    match e {
        ProtocolError::Hash(HashError::BinOverflow { .. }) => format!("{HASH_FAILURE}: {role}: {e}"),
        ProtocolError::HashFailure(r) | ProtocolError::PeerAborted(r) => r.clone(),
        e => format!("{role}: {e}"),
    }
}

fn dial(addr: &str, deadline: Instant) -> Result<TcpStream, ProtocolError> {
    loop {
        let attempt = addr.to_socket_addrs().map_err(ProtocolError::Io).and_then(|mut a| {
            let a = a.next().ok_or_else(|| ProtocolError::InvalidConfig(format!("cannot resolve {addr}")))?;
            TcpStream::connect(a).map_err(ProtocolError::Io)
        });
        match attempt {
            Ok(s) => return Ok(s),
            Err(e) if Instant::now() >= deadline => return Err(e),
            Err(_) => thread::sleep(Duration::from_millis(25)),
        }
    }
}

fn accept(listener: &TcpListener, deadline: Instant, stop: &AtomicBool) -> Result<TcpStream, ProtocolError> {
    listener.set_nonblocking(true)?;
    loop {
        match listener.accept() {
            Ok((s, _)) => {
                s.set_nonblocking(false)?;
                return Ok(s);
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                if stop.load(Ordering::Relaxed) {
                    return Err(ProtocolError::PeerAborted("session stopped".into()));
                }
                if Instant::now() >= deadline {
                    return Err(ProtocolError::Io(std::io::Error::new(
                        std::io::ErrorKind::TimedOut,
                        "timed out waiting for a connection",
                    )));
                }
                thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Dialing side of a setup connection.
fn setup_dial(
    ch: &mut Channel,
    me: PartyRole,
    expect: PartyRole,
    digest: &[u8; 32],
) -> Result<(), ProtocolError> {
    ch.send(MsgType::Hello, &hello_for(me).encode())?;
    let theirs = read_hello(ch).map_err(peer_error)?;
    check_hello(&theirs)?;
    if theirs.role != role_code(expect) {
        return Err(TwoPcError::HandshakeMismatch(format!("dialed {expect} but reached role {}", theirs.role)).into());
    }
    ch.send(MsgType::CircHash, digest)?;
    if ch.recv_expect(MsgType::CircHash).map_err(peer_error)? != digest {
        return Err(TwoPcError::HandshakeMismatch("job parameters differ".into()).into());
    }
    Ok(())
}

/// Listening side of a setup connection; returns the dialer's party index.
fn setup_answer(ch: &mut Channel, me: PartyRole, m: usize, digest: &[u8; 32]) -> Result<usize, ProtocolError> {
    let theirs = read_hello(ch).map_err(peer_error)?;
    check_hello(&theirs)?;
    ch.send(MsgType::Hello, &hello_for(me).encode())?;
    let party = theirs.role as usize;
    if party == 0 || party > m || party == role_code(me) as usize {
        return Err(TwoPcError::HandshakeMismatch(format!("unexpected peer role {party}")).into());
    }
    if ch.recv_expect(MsgType::CircHash).map_err(peer_error)? != digest {
        ch.send_abort(&format!("{me}: job parameters differ"));
        return Err(TwoPcError::HandshakeMismatch("job parameters differ".into()).into());
    }
    ch.send(MsgType::CircHash, digest)?;
    ch.flush()?;
    Ok(party - 1)
}

fn encode_share(party: usize, bin: usize, list: &ShareList) -> Vec<u8> {
    let mut v = Vec::with_capacity(8 + 4 + 8 * list.len());
    v.extend_from_slice(&(party as u32).to_be_bytes());
    v.extend_from_slice(&(bin as u32).to_be_bytes());
    v.extend(list.to_bytes());
    v
}

fn decode_share(plan: &JobPlan, payload: &[u8], party: usize, bin: usize) -> Result<ShareList, ProtocolError> {
    let bad = |msg: String| ProtocolError::MalformedShare(msg);
    if payload.len() < 8 {
        return Err(bad("truncated SHARE frame".into()));
    }
    let got_party = u32::from_be_bytes(payload[..4].try_into().unwrap()) as usize;
    let got_bin = u32::from_be_bytes(payload[4..8].try_into().unwrap()) as usize;
    if (got_party, got_bin) != (party, bin) {
        return Err(bad(format!("share for party {got_party} bin {got_bin}, expected party {party} bin {bin}")));
    }
    let list = ShareList::from_bytes(&payload[8..]).ok_or_else(|| bad("undecodable share list".into()))?;
    plan.check_share(&list)?;
    Ok(list)
}

/// SHARE payloads an input party sends to P1 and to P2. P1 only ever
/// receives the first half of each share and P2 only the second.
pub fn share_frames(party: usize, shares: &[(ShareList, ShareList)]) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    shares
        .iter()
        .enumerate()
        .map(|(bin, (a, b))| (encode_share(party, bin, a), encode_share(party, bin, b)))
        .unzip()
}

fn send_shares(ch: &mut Channel, frames: &[Vec<u8>]) -> Result<(), ProtocolError> {
    for f in frames {
        ch.send(MsgType::Share, f)?;
    }
    ch.flush()?;
    Ok(())
}

fn recv_shares(ch: &mut Channel, plan: &JobPlan, party: usize) -> Result<Vec<ShareList>, ProtocolError> {
    (0..plan.bins)
        .map(|bin| decode_share(plan, &ch.recv_expect(MsgType::Share).map_err(peer_error)?, party, bin))
        .collect()
}

fn run_dealer(plan: &JobPlan, opts: &NetOptions, set: &[u64]) -> Result<NetReport, ProtocolError> {
    let me = opts.role;
    let party = me.index();
    let deadline = Instant::now() + opts.timeout;
    let digest = plan.digest();
    let mut chans = Vec::with_capacity(2);
    for (addr, target) in opts.connect.iter().zip([PartyRole::P1, PartyRole::P2]) {
        let mut ch = Channel::tcp(dial(addr, deadline)?)?;
        setup_dial(&mut ch, me, target, &digest)?;
        chans.push(ch);
    }
    let shares = match plan.share_party(party, set, &mut party_rng(opts.seed, party)) {
        Ok(s) => s,
        Err(e) => {
            let reason = abort_reason(me, &e);
            chans.iter_mut().for_each(|c| c.send_abort(&reason));
            return Err(e);
        }
    };
    let (to_p1, to_p2) = share_frames(party, &shares);
    send_shares(&mut chans[0], &to_p1)?;
    send_shares(&mut chans[1], &to_p2)?;
    let mut results = Vec::with_capacity(2);
    for ch in chans.iter_mut() {
        let text = ch.recv_expect(MsgType::Result).map_err(peer_error)?;
        let text = String::from_utf8(text).map_err(|_| ProtocolError::MalformedOutput("non-UTF-8 result".into()))?;
        results.push(ProtocolOutput::parse(&text)?);
    }
    if results[0] != results[1] {
        return Err(ProtocolError::MalformedOutput("P1 and P2 reported different results".into()));
    }
    let mut stats = CommStats::default();
    chans.iter().for_each(|c| stats.absorb(c.stats()));
    Ok(NetReport { output: results.swap_remove(0), stats, bins: plan.bins })
}

/// State of P1 or P2 during a run.
struct Computing<'a> {
    plan: &'a JobPlan,
    opts: &'a NetOptions,
    listener: TcpListener,
    me: PartyRole,
    control: Option<Channel>,
    dealers: Vec<(usize, Channel)>,
    deadline: Instant,
}

impl<'a> Computing<'a> {
    fn new(plan: &'a JobPlan, opts: &'a NetOptions, listener: TcpListener) -> Result<Computing<'a>, ProtocolError> {
        Ok(Computing {
            plan,
            opts,
            listener,
            me: opts.role,
            control: None,
            dealers: Vec::new(),
            deadline: Instant::now() + opts.timeout,
        })
    }

    fn abort_all(&mut self, reason: &str) {
        if let Some(c) = self.control.as_mut() {
            c.send_abort(reason);
        }
        for (_, c) in self.dealers.iter_mut() {
            c.send_abort(reason);
        }
    }

    fn run(mut self, set: &[u64]) -> Result<NetReport, ProtocolError> {
        self.connect()?;
        let r = self.exchange_and_compute(set);
        match r {
            Ok(report) => Ok(report),
            Err(e) => {
                let reason = abort_reason(self.me, &e);
                self.abort_all(&reason);
                Err(e)
            }
        }
    }

    /// Establishes the control connection and one connection per dealer.
    fn connect(&mut self) -> Result<(), ProtocolError> {
        let m = self.plan.config.m;
        let digest = self.plan.digest();
        let stop = AtomicBool::new(false);
        if self.me == PartyRole::P2 {
            let mut ch = Channel::tcp(dial(&self.opts.connect[0], self.deadline)?)?;
            setup_dial(&mut ch, self.me, PartyRole::P1, &digest)?;
            self.control = Some(ch);
        }
        let expected = match self.me {
            PartyRole::P1 => m - 1,
            _ => m - 2,
        };
        while self.dealers.len() + usize::from(self.me == PartyRole::P1 && self.control.is_some()) < expected {
            let mut ch = Channel::tcp(accept(&self.listener, self.deadline, &stop)?)?;
            let party = setup_answer(&mut ch, self.me, m, &digest)?;
            let duplicate = self.dealers.iter().any(|(p, _)| *p == party) || (party == 1 && self.control.is_some());
            if duplicate || party == 0 || (party == 1 && self.me != PartyRole::P1) {
                ch.send_abort(&format!("{}: unexpected connection from party {}", self.me, party + 1));
                return Err(TwoPcError::ProtocolViolation(format!("unexpected connection from party {}", party + 1)).into());
            }
            match party {
                1 => self.control = Some(ch),
                _ => self.dealers.push((party, ch)),
            }
        }
        self.dealers.sort_by_key(|(p, _)| *p);
        Ok(())
    }

    fn exchange_and_compute(&mut self, set: &[u64]) -> Result<NetReport, ProtocolError> {
        let plan = self.plan;
        let me_idx = self.me.index();
        let mut rng = party_rng(self.opts.seed, me_idx);
        let own = plan.share_party(me_idx, set, &mut rng);
        let controls = plan.draw_controls(&mut rng);

        // Status first so that either side's input failure reaches the other.
        let control = self.control.as_mut().expect("control connection");
        let own = match self.me {
            PartyRole::P2 => {
                let own = own?;
                control.send(MsgType::Share, &[])?;
                control.recv_expect(MsgType::Share).map_err(peer_error)?;
                own
            }
            _ => {
                control.recv_expect(MsgType::Share).map_err(peer_error)?;
                let own = own?;
                control.send(MsgType::Share, &[])?;
                control.flush()?;
                own
            }
        };

        let m = plan.config.m;
        let mut mine: Vec<Option<Vec<ShareList>>> = vec![None; m];
        for (party, ch) in self.dealers.iter_mut() {
            mine[*party] = Some(recv_shares(ch, plan, *party)?);
        }

        let (to_p1, to_p2) = share_frames(me_idx, &own);
        let peer_idx = 1 - me_idx;
        let control = self.control.as_mut().unwrap();
        match self.me {
            PartyRole::P1 => {
                send_shares(control, &to_p2)?;
                mine[peer_idx] = Some(recv_shares(control, plan, peer_idx)?);
            }
            _ => {
                mine[peer_idx] = Some(recv_shares(control, plan, peer_idx)?);
                send_shares(control, &to_p1)?;
            }
        }
        mine[me_idx] = Some(own.into_iter().map(|(a, b)| if me_idx == 0 { a } else { b }).collect());
        let mine: Vec<Vec<ShareList>> = mine.into_iter().map(|s| s.expect("all parties shared")).collect();

        let circuit = Arc::new(plan.build_circuit()?);
        let inputs: Vec<Vec<bool>> = (0..plan.bins)
            .map(|bin| {
                let lists: Vec<&ShareList> = mine.iter().map(|p| &p[bin]).collect();
                plan.input.assemble(&lists, &controls[bin])
            })
            .collect();
        let (outputs, mut stats) = self.run_bins(circuit, &inputs)?;
        let output = plan.decode(&outputs)?;

        let text = write_result(&output);
        for (_, ch) in self.dealers.iter_mut() {
            ch.send(MsgType::Result, text.as_bytes())?;
            ch.flush()?;
        }
        if let Some(c) = &self.control {
            stats.absorb(c.stats());
        }
        self.dealers.iter().for_each(|(_, c)| stats.absorb(c.stats()));
        Ok(NetReport { output, stats, bins: plan.bins })
    }

    fn run_bins(&self, circuit: Arc<Circuit>, inputs: &[Vec<bool>]) -> Result<(Vec<Vec<bool>>, CommStats), ProtocolError> {
        let bins = self.plan.bins;
        let next = AtomicUsize::new(0);
        let stop = AtomicBool::new(false);
        let outputs: Mutex<Vec<Option<Vec<bool>>>> = Mutex::new(vec![None; bins]);
        let stats = Mutex::new(CommStats::default());
        let error: Mutex<Option<ProtocolError>> = Mutex::new(None);
        let base = SessionParams { kappa: 128, ..self.opts.session };
        let ctx = BinCtx { plan: self.plan, opts: self.opts, listener: &self.listener, me: self.me };
        let ctx = &ctx;
        thread::scope(|s| {
            for _ in 0..self.opts.workers.clamp(1, bins) {
                s.spawn(|| {
                    while !stop.load(Ordering::Relaxed) {
                        let ticket = next.fetch_add(1, Ordering::Relaxed);
                        if ticket >= bins {
                            break;
                        }
                        let r = match ctx.me {
                            PartyRole::P1 => ctx.serve_bin(&circuit, inputs, base, &stop),
                            _ => ctx.dial_bin(&circuit, inputs, base, ticket),
                        };
                        match r {
                            Ok((bin, out, st)) => {
                                outputs.lock().unwrap()[bin] = Some(out);
                                stats.lock().unwrap().absorb(&st);
                            }
                            Err(e) => {
                                stop.store(true, Ordering::Relaxed);
                                error.lock().unwrap().get_or_insert(e);
                            }
                        }
                    }
                });
            }
        });
        if let Some(e) = error.into_inner().unwrap() {
            return Err(e);
        }
        let outputs = outputs.into_inner().unwrap().into_iter().map(|o| o.expect("every bin ran")).collect();
        Ok((outputs, stats.into_inner().unwrap()))
    }
}

/// The parts of a computing party that bin workers share.
struct BinCtx<'a> {
    plan: &'a JobPlan,
    opts: &'a NetOptions,
    listener: &'a TcpListener,
    me: PartyRole,
}

impl BinCtx<'_> {
    /// P1: accept one session connection and garble the bin it names.
    fn serve_bin(
        &self,
        circuit: &Circuit,
        inputs: &[Vec<bool>],
        base: SessionParams,
        stop: &AtomicBool,
    ) -> Result<(usize, Vec<bool>, CommStats), ProtocolError> {
        let mut ch = Channel::tcp(accept(self.listener, Instant::now() + self.opts.timeout, stop)?)?;
        let hello = read_hello(&mut ch).map_err(peer_error)?;
        let bin = hello.bin as usize;
        if bin >= self.plan.bins {
            ch.send_abort("p1: bin out of range");
            return Err(TwoPcError::ProtocolViolation(format!("session for bin {bin} of {}", self.plan.bins)).into());
        }
        let params = SessionParams { bin: hello.bin, ..base };
        let mut rng = ChaCha12Rng::seed_from_u64(session_seed(self.opts.seed, 0, bin));
        let (out, st) = run_session_with_hello(Side::Garbler, circuit, &inputs[bin], &params, &mut ch, &mut rng, hello)
            .map_err(|e| {
                ch.send_abort(&format!("p1: bin {bin}: {e}"));
                peer_error(e)
            })?;
        Ok((bin, out, st))
    }

    /// P2: open the session for the next bin and evaluate it.
    fn dial_bin(
        &self,
        circuit: &Circuit,
        inputs: &[Vec<bool>],
        base: SessionParams,
        bin: usize,
    ) -> Result<(usize, Vec<bool>, CommStats), ProtocolError> {
        let mut ch = Channel::tcp(dial(&self.opts.connect[0], Instant::now() + self.opts.timeout)?)?;
        let params = SessionParams { bin: bin as u32, ..base };
        let mut rng = ChaCha12Rng::seed_from_u64(session_seed(self.opts.seed, 1, bin));
        let (out, st) =
            run_session(Side::Evaluator, circuit, &inputs[bin], &params, &mut ch, &mut rng).map_err(|e| {
                ch.send_abort(&format!("p2: bin {bin}: {e}"));
                peer_error(e)
            })?;
        Ok((bin, out, st))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{expected_output, FunctionKind, HashSettings, Mode};
    use crate::twopc::OtMode;

    fn run_all(config: &SessionConfig, sets: &[Vec<u64>]) -> Vec<Result<NetReport, ProtocolError>> {
        let l1 = TcpListener::bind("127.0.0.1:0").unwrap();
        let l2 = TcpListener::bind("127.0.0.1:0").unwrap();
        let a1 = l1.local_addr().unwrap().to_string();
        let a2 = l2.local_addr().unwrap().to_string();
        let mut listeners = [Some(l1), Some(l2)];
        let session = SessionParams { ot: OtMode::Extension, ..SessionParams::default() };
        thread::scope(|s| {
            let handles: Vec<_> = (0..config.m)
                .map(|party| {
                    let role = PartyRole::from_index(party);
                    let connect = match role {
                        PartyRole::P1 => vec![],
                        PartyRole::P2 => vec![a1.clone()],
                        PartyRole::Dealer(_) => vec![a1.clone(), a2.clone()],
                    };
                    let opts =
                        NetOptions { role, connect, session, seed: 7, workers: 2, timeout: Duration::from_secs(20) };
                    let listener = listeners.get_mut(party).and_then(Option::take);
                    let set = &sets[party];
                    s.spawn(move || run_party_on(config, &opts, listener, set))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    }

    #[test]
    fn four_parties_over_tcp() {
        let mut cfg = SessionConfig::new(4, 5, 10, Mode::HashingMscs, FunctionKind::RevealShuffled);
        cfg.hash = HashSettings { beta: Some(2), capacity: Some(5), ..HashSettings::default() };
        let sets = vec![vec![1, 2, 3, 4, 5], vec![2, 3, 4, 9, 10], vec![4, 3, 2, 11, 12], vec![2, 4, 3, 20, 30]];
        let want = expected_output(&cfg, &sets);
        for r in run_all(&cfg, &sets) {
            let r = r.unwrap();
            assert_eq!(r.output, want);
            assert_eq!(r.bins, 2);
        }
    }

    #[test]
    fn overflow_aborts_everyone() {
        let mut cfg = SessionConfig::new(3, 4, 8, Mode::HashingMscs, FunctionKind::Cardinality);
        cfg.hash = HashSettings { beta: Some(2), capacity: Some(2), ..HashSettings::default() };
        let layout = crate::hashing::BinLayout::new(3, 2, 2, 8, cfg.hash.f_seed).unwrap();
        // A dealer set that puts three elements into one bin.
        let crowded: Vec<u64> =
            (1..200u64).filter(|&x| crate::hashing::perm_hash(x, &layout).unwrap().0 == 0).take(3).collect();
        let sets = vec![vec![1], vec![1], crowded];
        for r in run_all(&cfg, &sets) {
            match r {
                Err(ProtocolError::HashFailure(_)) | Err(ProtocolError::Hash(HashError::BinOverflow { .. })) => {}
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn share_routing_separates_halves() {
        let a = ShareList { width: 8, shares: vec![1, 2] };
        let b = ShareList { width: 8, shares: vec![3, 4] };
        let (p1, p2) = share_frames(5, &[(a.clone(), b.clone())]);
        assert_eq!(&p1[0][8..], &a.to_bytes()[..]);
        assert_eq!(&p2[0][8..], &b.to_bytes()[..]);
    }
}
