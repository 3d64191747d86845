//! Criterion benchmarks for the ffspin pipeline; see `benches/`.
