use std::io::Write;
use std::time::Instant;

use log::info;
use mpsi_core::protocol::analysis::{analyze_hashing, analyze_mbwa, analyze_mscs, build_merge_circuit, optimize_report, StageRow, REFERENCE_GAMMA, REFERENCE_M, REFERENCE_ROWS};
use mpsi_core::protocol::net::{run_party, NetOptions};
use mpsi_core::protocol::{
    build_mbwa, build_mscs, expected_output, random_instance, read_set_file, run_local, write_result,
    write_result_file, Backend, FunctionKind, HashSettings, JobPlan, Mode, SessionConfig, Variant,
};
use mpsi_core::shufflenet::{permute_plain, waksman_route, Permutation};
use mpsi_core::twopc::{GarbleScheme, OtMode, SessionParams};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::config::resolve;
use crate::error::CliError;
use crate::{AnalyzeArgs, BenchArgs, GenArgs, OptimizeArgs, RunArgs, SelftestArgs, Stage};

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let cfg = resolve(args)?;
    let set = read_set_file(&cfg.input, cfg.session.sigma)?;
    let opts = NetOptions {
        role: cfg.role,
        connect: cfg.connect.clone(),
        session: cfg.session_params(),
        seed: cfg.seed,
        workers: cfg.workers,
        timeout: cfg.timeout,
    };
    info!("{}: starting {} with m={} n={} σ={}", cfg.role, cfg.session.mode, cfg.session.m, cfg.session.n, cfg.session.sigma);
    let report = run_party(&cfg.session, &opts, cfg.listen.as_deref(), &set)?;
    info!("{}: bins={} {}", cfg.role, report.bins, report.stats.to_kv());
    if let Some(path) = &cfg.output {
        write_result_file(path, &report.output)?;
    }
    print!("{}", write_result(&report.output));
    Ok(())
}

fn default_f(mode: Mode) -> FunctionKind {
    match mode {
        Mode::Mbwa => FunctionKind::BitVector,
        _ => FunctionKind::RevealShuffled,
    }
}

pub fn gen_circuit(args: GenArgs) -> Result<(), CliError> {
    let f = args.f.unwrap_or(default_f(args.mode));
    let circuit = match (args.stage, args.mode) {
        (Stage::Merge, _) => build_merge_circuit(args.m, args.n, args.sigma as usize)?,
        (Stage::Full, Mode::Mbwa) => build_mbwa(args.m, args.sigma)?,
        (Stage::Full, Mode::Mscs) => build_mscs(args.m, args.n, args.sigma as usize, f, args.variant)?,
        (Stage::Full, Mode::HashingMscs) => {
            let mut cfg = SessionConfig::new(args.m, args.n, args.sigma, Mode::HashingMscs, f);
            cfg.variant = args.variant;
            JobPlan::new(&cfg)?.build_circuit()?
        }
    };
    let s = circuit.stats();
    eprintln!(
        "and={} xor={} inv={} const={} depth={} p1_inputs={} p2_inputs={} outputs={}",
        s.and_count,
        s.xor_count,
        s.inv_count,
        s.const_count,
        s.depth,
        circuit.p1_inputs(),
        circuit.p2_inputs(),
        circuit.outputs().len()
    );
    let text = circuit.to_text();
    match &args.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn print_rows(rows: &[StageRow]) -> usize {
    println!("{:<16} {:>14} {:>14}  status", "stage", "generated", "formula");
    for r in rows {
        println!(
            "{:<16} {:>14} {:>14}  {}",
            r.stage,
            r.generated,
            r.formula,
            if r.matches() { "match" } else { "MISMATCH" }
        );
    }
    rows.iter().filter(|r| !r.matches()).count()
}

pub fn analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let mismatches = match args.mode {
        Mode::Mbwa => {
            println!("mode=mbwa m={} sigma={}", args.m, args.sigma);
            print_rows(&analyze_mbwa(args.m, args.sigma)?)
        }
        _ => {
            println!(
                "mode=mscs m={} n={} sigma={} f={} variant={}",
                args.m, args.n, args.sigma, args.f, args.variant
            );
            let rows = analyze_mscs(args.m, args.n, args.sigma as usize, args.f, args.variant)?;
            let bad = print_rows(&rows);
            let gamma = args.gamma.unwrap_or(HashSettings::default().gamma);
            match analyze_hashing(args.m, args.n as u64, args.sigma, gamma, args.f, args.variant) {
                Ok(c) => println!(
                    "hashing gamma={gamma} plain_and={} hashing_and={} beta={} capacity={} reduction={:.1}%",
                    c.plain,
                    c.hashing,
                    c.params.beta,
                    c.params.capacity,
                    100.0 * c.reduction()
                ),
                Err(e) => println!("hashing gamma={gamma} unavailable: {e}"),
            }
            bad
        }
    };
    println!("mismatches={mismatches}");
    if mismatches > 0 {
        return Err(CliError::ChecksFailed(mismatches));
    }
    Ok(())
}

pub fn optimize_hash(args: OptimizeArgs) -> Result<(), CliError> {
    let jobs: Vec<(usize, u32, u32, f64)> = match args.reference {
        true => REFERENCE_ROWS.iter().map(|r| (REFERENCE_M, r.log2n, r.sigma, REFERENCE_GAMMA)).collect(),
        false => vec![(args.m, args.log2n.unwrap(), args.sigma.unwrap(), args.gamma)],
    };
    println!(
        "{:>5} {:>3} {:>5} {:>6} {:>10} {:>10} {:>6} {:>14} {:>13} | {:>6} {:>5} {:>8} {:>9}  notes",
        "log2n", "σ", "γ", "δ", "b", "β", "B", "gates/element", "total/n", "ref b", "ref δ", "ref gpe", "deviation"
    );
    let mut infeasible = 0;
    for (m, log2n, sigma, gamma) in jobs {
        match optimize_report(m, log2n, sigma, gamma) {
            Ok(r) => {
                let p = &r.params;
                let mut line = format!(
                    "{:>5} {:>3} {:>5} {:>6.3} {:>10.1} {:>10} {:>6} {:>14.1} {:>13.1} |",
                    log2n,
                    sigma,
                    gamma,
                    p.delta,
                    p.b,
                    p.beta,
                    p.capacity,
                    p.gates_per_record_pair(),
                    p.gates_per_element()
                );
                match (r.reference, r.deviation()) {
                    (Some(refr), Some(dev)) => {
                        let mut notes = Vec::new();
                        if !refr.satisfies_constraint(gamma) {
                            notes.push("reference (b, δ) violates b > 3(log2 n + γ)/δ²");
                        }
                        if !refr.has_bins() {
                            notes.push("reference b exceeds n");
                        }
                        if dev.abs() > 0.15 {
                            notes.push("outside ±15%");
                        }
                        line.push_str(&format!(
                            " {:>6} {:>5} {:>8} {:>+8.1}%  {}",
                            refr.b,
                            refr.delta,
                            refr.gates_per_element,
                            100.0 * dev,
                            notes.join("; ")
                        ));
                    }
                    _ => line.push_str(&format!(" {:>6} {:>5} {:>8} {:>9}", "-", "-", "-", "-")),
                }
                println!("{line}");
            }
            Err(e) => {
                infeasible += 1;
                println!("{log2n:>5} {sigma:>3} {gamma:>5} Infeasible: {e}");
            }
        }
    }
    if infeasible > 0 && !args.reference {
        return Err(CliError::Hash(mpsi_core::hashing::HashError::Infeasible(format!(
            "no bin layout for log2 n = {}, σ = {}",
            args.log2n.unwrap(),
            args.sigma.unwrap()
        ))));
    }
    Ok(())
}

struct Checks {
    failed: usize,
}

impl Checks {
    fn record(&mut self, name: &str, result: Result<(), String>) {
        match result {
            Ok(()) => println!("ok    {name}"),
            Err(e) => {
                self.failed += 1;
                println!("FAIL  {name}: {e}");
            }
        }
    }
}

fn check_rows(rows: Result<Vec<StageRow>, mpsi_core::protocol::ProtocolError>) -> Result<(), String> {
    let rows = rows.map_err(|e| e.to_string())?;
    match rows.iter().find(|r| !r.matches()) {
        None => Ok(()),
        Some(r) => Err(format!("{} generated {} vs formula {}", r.stage, r.generated, r.formula)),
    }
}

pub fn selftest(args: SelftestArgs) -> Result<(), CliError> {
    let mut checks = Checks { failed: 0 };
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    for (m, n, w) in [(2, 4, 8), (3, 4, 8), (4, 4, 8), (5, 8, 12)] {
        for f in [FunctionKind::RevealShuffled, FunctionKind::Cardinality] {
            checks.record(
                &format!("formulas m={m} n={n} σ={w} f={f}"),
                check_rows(analyze_mscs(m, n, w, f, Variant::PaperExact)),
            );
        }
    }
    checks.record("formulas mbwa m=3 σ=4", check_rows(analyze_mbwa(3, 4)));
    checks.record(
        "waksman routing n=2..8",
        (2..=8).try_for_each(|n| {
            for _ in 0..20 {
                let p = Permutation::random(n, &mut rng);
                let items: Vec<usize> = (0..n).collect();
                if permute_plain(items.clone(), &waksman_route(&p)) != p.apply(&items) {
                    return Err(format!("n = {n}: {:?} routed wrongly", p.as_slice()));
                }
            }
            Ok(())
        }),
    );
    let garbled = Backend::Garbled(SessionParams {
        scheme: GarbleScheme::HalfGates,
        ot: OtMode::Extension,
        ..SessionParams::default()
    });
    let cases = [
        (Mode::Mbwa, FunctionKind::BitVector, 3, 6, 6),
        (Mode::Mscs, FunctionKind::RevealShuffled, 3, 4, 8),
        (Mode::Mscs, FunctionKind::Cardinality, 4, 4, 8),
        (Mode::HashingMscs, FunctionKind::RevealShuffled, 3, 4, 10),
        (Mode::HashingMscs, FunctionKind::Cardinality, 3, 4, 10),
    ];
    for (mode, f, m, n, sigma) in cases {
        let mut cfg = SessionConfig::new(m, n, sigma, mode, f);
        if mode == Mode::HashingMscs {
            cfg.hash = HashSettings { beta: Some(2), capacity: Some(n), ..HashSettings::default() };
        }
        for (label, backend) in [("cleartext", Backend::Cleartext), ("garbled", garbled)] {
            let result = (0..args.instances).try_for_each(|i| {
                let sets = random_instance(&cfg, &mut rng);
                let run = run_local(&cfg, &sets, backend, args.seed.wrapping_add(i as u64), 2).map_err(|e| e.to_string())?;
                let want = expected_output(&cfg, &sets);
                match run.output == want {
                    true => Ok(()),
                    false => Err(format!("instance {i}: got {:?}, expected {want:?}", run.output)),
                }
            });
            checks.record(&format!("end-to-end {mode} f={f} {label}"), result);
        }
    }
    println!("failed={}", checks.failed);
    match checks.failed {
        0 => Ok(()),
        k => Err(CliError::ChecksFailed(k)),
    }
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let f = args.f.unwrap_or(match args.mode {
        Mode::Mbwa => FunctionKind::BitVector,
        _ => FunctionKind::Cardinality,
    });
    let mut cfg = SessionConfig::new(args.m, args.n, args.sigma, args.mode, f);
    if let Some(g) = args.gamma {
        cfg.hash.gamma = g;
    }
    let params = SessionParams { scheme: args.scheme, ot: args.ot, allow_insecure_ot: args.insecure_ot, ..SessionParams::default() };
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    for rep in 0..args.repeat.max(1) {
        let sets = random_instance(&cfg, &mut rng);
        let start = Instant::now();
        let run = run_local(&cfg, &sets, Backend::Garbled(params), args.seed.wrapping_add(rep as u64), workers)?;
        let wall = start.elapsed();
        if run.output != expected_output(&cfg, &sets) {
            return Err(CliError::ChecksFailed(1));
        }
        println!(
            "rep={rep} mode={} f={f} m={} n={} sigma={} scheme={} ot={:?} bins={} and_gates_per_bin={} wall_ms={:.3} sent_total={} {}",
            args.mode,
            args.m,
            args.n,
            args.sigma,
            scheme_name(args.scheme),
            args.ot,
            run.bins,
            run.and_gates,
            wall.as_secs_f64() * 1e3,
            run.garbler_stats.total_sent() + run.evaluator_stats.total_sent(),
            run.garbler_stats.to_kv()
        );
    }
    Ok(())
}

fn scheme_name(s: GarbleScheme) -> &'static str {
    match s {
        GarbleScheme::FourRow => "four-row",
        GarbleScheme::HalfGates => "half-gates",
    }
}
