use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mpsi_core::protocol::analysis::build_merge_circuit;
use mpsi_core::protocol::{FunctionKind, JobPlan, Mode, SessionConfig};
use mpsi_core::twopc::{garble, run_loopback, GarbleScheme, OtMode, SessionParams};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn merge_generation(c: &mut Criterion) {
    let mut g = c.benchmark_group("merge_generation");
    for (m, n) in [(3, 16), (5, 32), (8, 64)] {
        g.bench_with_input(BenchmarkId::from_parameter(format!("m{m}_n{n}")), &(m, n), |b, &(m, n)| {
            b.iter(|| build_merge_circuit(m, n, 16).unwrap())
        });
    }
    g.finish();
}

fn garbling(c: &mut Criterion) {
    let cfg = SessionConfig::new(3, 32, 16, Mode::Mscs, FunctionKind::RevealShuffled);
    let circuit = JobPlan::new(&cfg).unwrap().build_circuit().unwrap();
    let mut g = c.benchmark_group("garble_mscs_m3_n32");
    for scheme in [GarbleScheme::FourRow, GarbleScheme::HalfGates] {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        g.bench_function(format!("{scheme:?}"), |b| b.iter(|| garble(&circuit, scheme, &mut rng)));
    }
    g.finish();
}

fn loopback_session(c: &mut Criterion) {
    let cfg = SessionConfig::new(3, 8, 12, Mode::Mscs, FunctionKind::Cardinality);
    let circuit = Arc::new(JobPlan::new(&cfg).unwrap().build_circuit().unwrap());
    let p1 = vec![false; circuit.p1_inputs()];
    let p2 = vec![true; circuit.p2_inputs()];
    let mut g = c.benchmark_group("loopback_session");
    g.sample_size(10);
    for ot in [OtMode::Base, OtMode::Extension] {
        let params = SessionParams { ot, ..SessionParams::default() };
        g.bench_function(format!("{ot:?}"), |b| {
            b.iter(|| run_loopback(circuit.clone(), p1.clone(), p2.clone(), params, 5).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, merge_generation, garbling, loopback_session);
criterion_main!(benches);
