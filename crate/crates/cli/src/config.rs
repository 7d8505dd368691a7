use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use mpsi_core::protocol::{FunctionKind, HashSettings, Mode, PartyRole, SessionConfig, Variant};
use mpsi_core::twopc::{GarbleScheme, OtMode, SessionParams};

use crate::error::CliError;
use crate::RunArgs;

/// Fully resolved settings for `mpsi run`.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub role: PartyRole,
    pub session: SessionConfig,
    pub listen: Option<String>,
    pub connect: Vec<String>,
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub insecure_ot: bool,
    pub scheme: GarbleScheme,
    pub ot: OtMode,
    pub workers: usize,
    pub timeout: Duration,
}

impl RunConfig {
    pub fn session_params(&self) -> SessionParams {
        SessionParams {
            scheme: self.scheme,
            ot: self.ot,
            allow_insecure_ot: self.insecure_ot,
            kappa: self.session.security.kappa,
            bin: 0,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "role",
    "m",
    "n",
    "sigma",
    "mode",
    "f",
    "variant",
    "gamma",
    "listen",
    "connect",
    "input",
    "output",
    "seed",
    "insecure-ot",
    "beta",
    "capacity",
    "hash-seed",
    "scheme",
    "ot",
    "workers",
    "timeout",
];

/// `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_file(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key = value", origin.display(), i + 1))
        })?;
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("{}:{}: unknown key `{key}`", origin.display(), i + 1)));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("{}:{}: duplicate key `{key}`", origin.display(), i + 1)));
        }
    }
    Ok(map)
}

struct Merger {
    file: BTreeMap<String, String>,
}

impl Merger {
    /// The flag value if given, else the parsed config-file value.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| CliError::Config(format!("config key `{key}`: {e}"))),
        }
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.pick(flag, key)?.ok_or_else(|| CliError::Usage(format!("missing required --{key}")))
    }
}

pub fn resolve(args: RunArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config_file(&text, path)?
        }
        None => BTreeMap::new(),
    };
    let g = Merger { file };
    let role: PartyRole = g.require(args.role, "role")?;
    let m: usize = g.require(args.m, "m")?;
    let n: usize = g.require(args.n, "n")?;
    let sigma: u32 = g.require(args.sigma, "sigma")?;
    let mode: Mode = g.require(args.mode, "mode")?;
    let f: FunctionKind = g.pick(args.f, "f")?.unwrap_or(match mode {
        Mode::Mbwa => FunctionKind::BitVector,
        _ => FunctionKind::Cardinality,
    });
    let mut session = SessionConfig::new(m, n, sigma, mode, f);
    session.variant = g.pick::<Variant>(args.variant, "variant")?.unwrap_or(Variant::Robust);
    let defaults = HashSettings::default();
    session.hash = HashSettings {
        gamma: g.pick(args.gamma, "gamma")?.unwrap_or(defaults.gamma),
        beta: g.pick(args.beta, "beta")?,
        capacity: g.pick(args.capacity, "capacity")?,
        f_seed: g.pick(args.hash_seed, "hash-seed")?.unwrap_or(defaults.f_seed),
    };
    let connect: Option<String> = g.pick(args.connect, "connect")?;
    let connect = connect
        .map(|c| c.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .unwrap_or_default();
    let insecure_ot = args.insecure_ot
        || match g.file.get("insecure-ot").map(String::as_str) {
            None | Some("false") | Some("0") | Some("no") => false,
            Some("true") | Some("1") | Some("yes") => true,
            Some(v) => return Err(CliError::Config(format!("config key `insecure-ot`: not a boolean: {v}"))),
        };
    let workers = g
        .pick(args.workers, "workers")?
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let timeout: u64 = g.pick(args.timeout, "timeout")?.unwrap_or(60);
    Ok(RunConfig {
        role,
        session,
        listen: g.pick(args.listen, "listen")?,
        connect,
        input: g.require(args.input, "input")?,
        output: g.pick(args.output, "output")?,
        seed: g.pick(args.seed, "seed")?.unwrap_or_else(rand::random),
        insecure_ot,
        scheme: g.pick(args.scheme, "scheme")?.unwrap_or(GarbleScheme::FourRow),
        ot: g.pick(args.ot, "ot")?.unwrap_or(OtMode::Base),
        workers: workers.max(1),
        timeout: Duration::from_secs(timeout),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let p = Path::new("c.conf");
        let map = parse_config_file("# comment\nm = 3\n\nmode=mscs\n", p).unwrap();
        assert_eq!(map["m"], "3");
        assert_eq!(map["mode"], "mscs");
        assert!(matches!(parse_config_file("colour = red", p), Err(CliError::Config(_))));
        assert!(matches!(parse_config_file("m", p), Err(CliError::Config(_))));
        assert!(matches!(parse_config_file("m=1\nm=2", p), Err(CliError::Config(_))));
    }
}
