//! Semi-honest two-party computation: garbled circuits, oblivious transfer,
//! framed channels and a cleartext reference backend.

pub mod channel;
pub mod garble;
pub mod label;
pub mod ot;
mod session;

use thiserror::Error;

use crate::circuit::CircuitError;

pub use channel::{Channel, CommStats, MsgType, Phase, PhaseBytes};
pub use garble::{decode, evaluate, garble, DecodeMap, GarbleScheme, GarbledMaterial, InputLabels};
pub use ot::{ot_receive, ot_send, OtMode};
pub use session::{
    cleartext_session, read_hello, run_loopback, run_session, run_session_with_hello, Hello, SessionParams, Side,
    PROTOCOL_VERSION,
};

#[derive(Debug, Error)]
pub enum TwoPcError {
    #[error("channel closed by peer")]
    ChannelClosed,
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("handshake mismatch: {0}")]
    HandshakeMismatch(String),
    #[error("output label {output} matches neither decoding entry")]
    DecodeFailure { output: usize },
    #[error("peer aborted: {0}")]
    Aborted(String),
    #[error("insecure OT requested without --insecure-ot")]
    InsecureOtRefused,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
