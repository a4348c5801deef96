//! Criterion benchmarks for `posric-core`; see `benches/certify.rs`.
//!
//! `cargo bench -p posric-bench`
