//! Criterion benchmarks for lgp-core; see `benches/`.
