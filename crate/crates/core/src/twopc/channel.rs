//! Length-prefixed framing over a byte stream with per-phase accounting.
//!
//! A frame is a 4-byte big-endian payload length, a 1-byte type and the
//! payload. Writes are buffered and flushed before every blocking read.

use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::net::{TcpListener, TcpStream};

use super::TwoPcError;

/// Upper bound on a single frame payload.
pub const MAX_FRAME: usize = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Hello = 1,
    CircHash = 2,
    Share = 3,
    OtMsg = 4,
    Tables = 5,
    Labels = 6,
    Output = 7,
    Result = 8,
    Abort = 9,
}

impl MsgType {
    fn from_u8(v: u8) -> Option<MsgType> {
        use MsgType::*;
        Some(match v {
            1 => Hello,
            2 => CircHash,
            3 => Share,
            4 => OtMsg,
            5 => Tables,
            6 => Labels,
            7 => Output,
            8 => Result,
            9 => Abort,
            _ => return None,
        })
    }
}

/// Which part of a session bytes are attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Handshakes, shares and results.
    Control,
    Ot,
    Tables,
    Labels,
    Output,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PhaseBytes {
    pub sent: u64,
    pub received: u64,
}

impl PhaseBytes {
    pub fn total(&self) -> u64 {
        self.sent + self.received
    }
}

/// Payload bytes per phase. Frame headers are not counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CommStats {
    pub control: PhaseBytes,
    pub ot: PhaseBytes,
    pub tables: PhaseBytes,
    pub labels: PhaseBytes,
    pub output: PhaseBytes,
    /// Ciphertext rows per AND gate used by the session.
    pub rows_per_and: u32,
}

impl CommStats {
    pub fn phase_mut(&mut self, p: Phase) -> &mut PhaseBytes {
        match p {
            Phase::Control => &mut self.control,
            Phase::Ot => &mut self.ot,
            Phase::Tables => &mut self.tables,
            Phase::Labels => &mut self.labels,
            Phase::Output => &mut self.output,
        }
    }

    fn phases(&self) -> [PhaseBytes; 5] {
        [self.control, self.ot, self.tables, self.labels, self.output]
    }

    pub fn total_sent(&self) -> u64 {
        self.phases().iter().map(|p| p.sent).sum()
    }

    pub fn total_received(&self) -> u64 {
        self.phases().iter().map(|p| p.received).sum()
    }

    /// Adds another session's counts (used to sum per-bin sessions).
    pub fn absorb(&mut self, other: &CommStats) {
        for (p, o) in [Phase::Control, Phase::Ot, Phase::Tables, Phase::Labels, Phase::Output]
            .into_iter()
            .zip(other.phases())
        {
            let mine = self.phase_mut(p);
            mine.sent += o.sent;
            mine.received += o.received;
        }
        self.rows_per_and = self.rows_per_and.max(other.rows_per_and);
    }

    /// `key=value` pairs for machine-readable reports.
    pub fn to_kv(&self) -> String {
        format!(
            "ot_sent={} ot_recv={} tables_sent={} tables_recv={} labels_sent={} labels_recv={} output_sent={} output_recv={} control_sent={} control_recv={} rows_per_and={}",
            self.ot.sent,
            self.ot.received,
            self.tables.sent,
            self.tables.received,
            self.labels.sent,
            self.labels.received,
            self.output.sent,
            self.output.received,
            self.control.sent,
            self.control.received,
            self.rows_per_and
        )
    }
}

type BoxRead = Box<dyn Read + Send>;
type BoxWrite = Box<dyn Write + Send>;

pub struct Channel {
    reader: BufReader<BoxRead>,
    writer: BufWriter<BoxWrite>,
    phase: Phase,
    stats: CommStats,
}

impl Channel {
    pub fn new(reader: impl Read + Send + 'static, writer: impl Write + Send + 'static) -> Channel {
        Channel {
            reader: BufReader::with_capacity(1 << 16, Box::new(reader)),
            writer: BufWriter::with_capacity(1 << 16, Box::new(writer)),
            phase: Phase::Control,
            stats: CommStats::default(),
        }
    }

    pub fn tcp(stream: TcpStream) -> Result<Channel, TwoPcError> {
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        Ok(Channel::new(reader, stream))
    }

    /// Two channels connected over 127.0.0.1.
    pub fn loopback_pair() -> Result<(Channel, Channel), TwoPcError> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let a = TcpStream::connect(listener.local_addr()?)?;
        let (b, _) = listener.accept()?;
        Ok((Channel::tcp(a)?, Channel::tcp(b)?))
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn stats(&self) -> &CommStats {
        &self.stats
    }

    pub fn stats_mut(&mut self) -> &mut CommStats {
        &mut self.stats
    }

    pub fn send(&mut self, ty: MsgType, payload: &[u8]) -> Result<(), TwoPcError> {
        if payload.len() > MAX_FRAME {
            return Err(TwoPcError::ProtocolViolation(format!("frame of {} bytes is too large", payload.len())));
        }
        let mut header = [0u8; 5];
        header[..4].copy_from_slice(&(payload.len() as u32).to_be_bytes());
        header[4] = ty as u8;
        self.writer.write_all(&header).map_err(map_io)?;
        self.writer.write_all(payload).map_err(map_io)?;
        self.stats.phase_mut(self.phase).sent += payload.len() as u64;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), TwoPcError> {
        self.writer.flush().map_err(map_io)
    }

    /// Next frame. An ABORT frame surfaces as [`TwoPcError::Aborted`].
    pub fn recv(&mut self) -> Result<(MsgType, Vec<u8>), TwoPcError> {
        self.flush()?;
        let mut header = [0u8; 5];
        self.reader.read_exact(&mut header).map_err(map_io)?;
        let len = u32::from_be_bytes(header[..4].try_into().unwrap()) as usize;
        let ty = MsgType::from_u8(header[4])
            .ok_or_else(|| TwoPcError::ProtocolViolation(format!("unknown frame type {}", header[4])))?;
        if len > MAX_FRAME {
            return Err(TwoPcError::ProtocolViolation(format!("frame of {len} bytes is too large")));
        }
        let mut payload = vec![0u8; len];
        self.reader.read_exact(&mut payload).map_err(map_io)?;
        self.stats.phase_mut(self.phase).received += len as u64;
        if ty == MsgType::Abort {
            return Err(TwoPcError::Aborted(String::from_utf8_lossy(&payload).into_owned()));
        }
        Ok((ty, payload))
    }

    pub fn recv_expect(&mut self, expected: MsgType) -> Result<Vec<u8>, TwoPcError> {
        let (ty, payload) = self.recv()?;
        if ty != expected {
            return Err(TwoPcError::ProtocolViolation(format!("expected {expected:?}, got {ty:?}")));
        }
        Ok(payload)
    }

    /// Best effort: the peer may already be gone.
    pub fn send_abort(&mut self, reason: &str) {
        let _ = self.send(MsgType::Abort, reason.as_bytes());
        let _ = self.flush();
    }
}

fn map_io(e: std::io::Error) -> TwoPcError {
    match e.kind() {
        ErrorKind::UnexpectedEof | ErrorKind::BrokenPipe | ErrorKind::ConnectionReset | ErrorKind::ConnectionAborted => {
            TwoPcError::ChannelClosed
        }
        _ => TwoPcError::Io(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frames_and_accounting() {
        let (mut a, mut b) = Channel::loopback_pair().unwrap();
        a.set_phase(Phase::Tables);
        a.send(MsgType::Tables, &[7; 100]).unwrap();
        a.flush().unwrap();
        b.set_phase(Phase::Tables);
        assert_eq!(b.recv_expect(MsgType::Tables).unwrap(), vec![7; 100]);
        assert_eq!(a.stats().tables.sent, 100);
        assert_eq!(b.stats().tables.received, 100);
        a.send(MsgType::Labels, &[]).unwrap();
        a.flush().unwrap();
        assert!(matches!(b.recv_expect(MsgType::Output), Err(TwoPcError::ProtocolViolation(_))));
    }

    #[test]
    fn abort_and_close() {
        let (mut a, mut b) = Channel::loopback_pair().unwrap();
        a.send_abort("hash failure");
        match b.recv() {
            Err(TwoPcError::Aborted(r)) => assert_eq!(r, "hash failure"),
            other => panic!("{other:?}"),
        }
        drop(a);
        assert!(matches!(b.recv(), Err(TwoPcError::ChannelClosed)));
    }

    #[test]
    fn wire_format() {
        let buf = std::sync::Arc::new(std::sync::Mutex::new(Vec::new()));
        struct Shared(std::sync::Arc<std::sync::Mutex<Vec<u8>>>);
        impl Write for Shared {
            fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
                self.0.lock().unwrap().extend_from_slice(b);
                Ok(b.len())
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let mut ch = Channel::new(std::io::empty(), Shared(buf.clone()));
        ch.send(MsgType::Hello, &[1, 2, 3]).unwrap();
        ch.flush().unwrap();
        assert_eq!(*buf.lock().unwrap(), vec![0, 0, 0, 3, 1, 1, 2, 3]);
    }
}
