//! Criterion benchmarks for `ecop-core` live in `benches/`; run them with
//! `cargo bench -p ecop-bench`.
