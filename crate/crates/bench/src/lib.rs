//! Criterion benchmarks for the transfer pipeline live in `benches/`.
