//! Criterion benchmarks for the `coprod` crate; see `benches/`.
