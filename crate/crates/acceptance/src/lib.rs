//! Acceptance checks live in `tests/acceptance.rs`; run them with
//! `cargo test -p mimo-bounds-validation --test acceptance`.
