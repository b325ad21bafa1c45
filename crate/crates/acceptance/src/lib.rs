//! Holds the `acceptance` test target, which checks every end-to-end
//! criterion at its fixed tolerance. The crate itself exports nothing.
//!
//! It lives in its own package so that `cargo test --workspace` runs it
//! after the unit and integration tests of the other crates.
