//! Benchmarks only; see `benches/core.rs`.
