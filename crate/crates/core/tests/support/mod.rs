//! Shared test-side oracles, kept independent of the library implementations
//! they check.

// Each test binary compiles this module separately and uses its own subset.
#![allow(dead_code)]

pub mod jacobi;
pub mod racah_oracle;
