//! Criterion benchmarks for `tcm-core`; see `benches/`.
