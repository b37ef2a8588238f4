//! Criterion benchmarks for the receiver kernels live in `benches/`.
