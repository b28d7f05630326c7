//! Benchmark-only crate; see `benches/`.

pub use prational;
