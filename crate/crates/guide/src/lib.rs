//! Compiles and runs every Rust snippet of the book as a doctest.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/logic.md")]
pub mod logic {}

#[doc = include_str!("../../../book/src/calculus.md")]
pub mod calculus {}

#[doc = include_str!("../../../book/src/state-graph.md")]
pub mod state_graph {}

#[doc = include_str!("../../../book/src/analyses.md")]
pub mod analyses {}

#[doc = include_str!("../../../book/src/dopler.md")]
pub mod dopler {}

#[doc = include_str!("../../../book/src/sessions.md")]
pub mod sessions {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
