//! Criterion benchmarks for the homogenization engine; see `benches/`.
