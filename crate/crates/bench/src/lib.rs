//! Benchmarks for furthlab-core live in `benches/`.
