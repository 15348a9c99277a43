//! Criterion benchmarks for the label-coverage engine live in `benches/`.
