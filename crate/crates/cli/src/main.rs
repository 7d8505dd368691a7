mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpsi_core::protocol::{FunctionKind, Mode, PartyRole, Variant};
use mpsi_core::twopc::{GarbleScheme, OtMode};

use error::exit;

/// Multi-party private set intersection over garbled circuits.
#[derive(Parser, Debug)]
#[command(name = "mpsi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one party of a session.
    Run(RunArgs),
    /// Write a circuit in the text format.
    GenCircuit(GenArgs),
    /// Compare generated gate counts with the closed forms.
    Analyze(AnalyzeArgs),
    /// Search bin parameters for hashing-mscs.
    OptimizeHash(OptimizeArgs),
    /// Quick end-to-end consistency checks.
    Selftest(SelftestArgs),
    /// Time an in-process session and report traffic as key=value pairs.
    Bench(BenchArgs),
}

/// Flags of `mpsi run`. Anything not given falls back to `--config`.
#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// p1, p2 or dealer:<i>
    #[arg(long)]
    pub role: Option<PartyRole>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub sigma: Option<u32>,
    /// mbwa, mscs or hashing-mscs
    #[arg(long)]
    pub mode: Option<Mode>,
    /// reveal, cardinality or bitvector
    #[arg(long)]
    pub f: Option<FunctionKind>,
    /// paper-exact or robust
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of bins (hashing-mscs); requires --capacity.
    #[arg(long)]
    pub beta: Option<u64>,
    /// Bin capacity (hashing-mscs); requires --beta.
    #[arg(long)]
    pub capacity: Option<usize>,
    /// Public seed of the bin round function.
    #[arg(long)]
    pub hash_seed: Option<u64>,
    /// Address to listen on (p1, p2).
    #[arg(long)]
    pub listen: Option<String>,
    /// p2: P1's address. Dealers: P1's and P2's addresses, comma separated.
    #[arg(long)]
    pub connect: Option<String>,
    /// Set file: one element per line, decimal or 0x-hex.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Allow the trusted-dealer OT mode (benchmarking only).
    #[arg(long)]
    pub insecure_ot: bool,
    /// four-row or half-gates
    #[arg(long)]
    pub scheme: Option<GarbleScheme>,
    /// base, iknp or insecure
    #[arg(long)]
    pub ot: Option<OtMode>,
    /// Concurrent bin sessions.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seconds to wait for peers to connect.
    #[arg(long)]
    pub timeout: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    /// The merge network alone, on plaintext lists supplied by P1.
    Merge,
    /// The complete circuit of the selected mode.
    Full,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "full")]
    pub stage: Stage,
    #[arg(long, default_value = "mscs")]
    pub mode: Mode,
    #[arg(long)]
    pub f: Option<FunctionKind>,
    #[arg(long, default_value = "paper-exact")]
    pub variant: Variant,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub sigma: u32,
    /// Defaults to standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long, default_value = "mscs")]
    pub mode: Mode,
    #[arg(long, default_value = "reveal")]
    pub f: FunctionKind,
    #[arg(long, default_value = "paper-exact")]
    pub variant: Variant,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub sigma: u32,
    /// Also compare against hashing-mscs at this γ.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, required_unless_present = "reference")]
    pub log2n: Option<u32>,
    #[arg(long, required_unless_present = "reference")]
    pub sigma: Option<u32>,
    #[arg(long, default_value_t = 40.0)]
    pub gamma: f64,
    /// Run every reference row.
    #[arg(long)]
    pub reference: bool,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Random instances per mode and backend.
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value = "mscs")]
    pub mode: Mode,
    #[arg(long)]
    pub f: Option<FunctionKind>,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 16)]
    pub sigma: u32,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value = "four-row")]
    pub scheme: GarbleScheme,
    #[arg(long, default_value = "iknp")]
    pub ot: OtMode,
    #[arg(long)]
    pub insecure_ot: bool,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MPSI_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::GenCircuit(a) => commands::gen_circuit(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::OptimizeHash(a) => commands::optimize_hash(a),
        Command::Selftest(a) => commands::selftest(a),
        Command::Bench(a) => commands::bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
