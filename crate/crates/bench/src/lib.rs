//! Criterion benchmarks for isotropykit live in `benches/`; run them with
//! `cargo bench -p isotropykit-bench`.
