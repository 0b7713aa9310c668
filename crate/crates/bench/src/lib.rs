//! Bench-only crate; see `benches/multiplication.rs`.
