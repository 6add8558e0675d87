//! The book's chapters, included as doc comments so that every code block
//! in `book/src/` compiles and runs under `cargo test --doc`. The guide
//! cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/elliptic.md")]
pub mod elliptic {}

#[doc = include_str!("../../../book/src/transient.md")]
pub mod transient {}

#[doc = include_str!("../../../book/src/stationary.md")]
pub mod stationary {}

#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
