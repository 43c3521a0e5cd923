//! Benchmarks live in `benches/`; run them with `cargo bench -p esc-bench`.

pub use esc_core;
