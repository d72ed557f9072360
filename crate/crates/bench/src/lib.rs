//! Criterion benchmarks for the kicked Ising pipelines; see `benches/`.
