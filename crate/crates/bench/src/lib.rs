//! Criterion benchmarks for the deformation engine live in `benches/`.
