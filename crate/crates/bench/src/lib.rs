//! Criterion benchmarks for `geophase-core` live in `benches/`.
