use mpsi_core::hashing::HashError;
use mpsi_core::protocol::ProtocolError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const HASH_FAILURE: i32 = 3;
    pub const INPUT: i32 = 4;
    pub const NETWORK: i32 = 5;
    pub const CHECKS: i32 = 6;
}

fn hash_code(e: &HashError) -> i32 {
    match e {
        HashError::BinOverflow { .. } => exit::HASH_FAILURE,
        HashError::DomainViolation { .. } | HashError::DuplicateElement(_) => exit::INPUT,
        HashError::Infeasible(_) | HashError::InvalidLayout(_) => exit::USAGE,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ProtocolError as P;
        match self {
            CliError::Usage(_) | CliError::Config(_) => exit::USAGE,
            CliError::Hash(e) => hash_code(e),
            CliError::Io(_) => exit::INPUT,
            CliError::ChecksFailed(_) => exit::CHECKS,
            CliError::Protocol(p) => match p {
                P::Hash(e) => hash_code(e),
                P::HashFailure(_) => exit::HASH_FAILURE,
                P::InvalidConfig(_) | P::InvalidVariant(_) | P::UniverseTooLarge(_) => exit::USAGE,
                P::DuplicateElement(_)
                | P::DomainViolation { .. }
                | P::SetSizeMismatch { .. }
                | P::SetFile { .. }
                | P::Io(_) => exit::INPUT,
                P::TwoPc(_) | P::PeerAborted(_) | P::MalformedShare(_) | P::MalformedOutput(_) => exit::NETWORK,
                P::Circuit(_) => exit::INTERNAL,
            },
        }
    }

    /// Message printed on stderr before exiting.
    pub fn report(&self) -> String {
        match self.exit_code() {
            exit::HASH_FAILURE => format!("error: hash failure, protocol terminated ({self})"),
            _ => format!("error: {self}"),
        }
    }
}
