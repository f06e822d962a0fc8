//! Criterion benchmarks for the phaselab kernels live in `benches/`.
