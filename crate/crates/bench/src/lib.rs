//! Criterion benchmarks for `qrough`; see `benches/`.
