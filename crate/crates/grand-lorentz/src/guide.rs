//! The project guide, embedded chapter by chapter so every code block in
//! the book compiles and runs under `cargo test --doc`.
//!
//! The sources live in `book/src/` at the repository root; render the
//! standalone version with `mdbook build book`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/parameters.md")]
pub mod parameters {}

#[doc = include_str!("../../../book/src/rearrangement.md")]
pub mod rearrangement {}

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}

#[doc = include_str!("../../../book/src/norms.md")]
pub mod norms {}

#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
