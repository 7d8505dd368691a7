//! Criterion benchmarks for `mpsi-core`; see `benches/`.
