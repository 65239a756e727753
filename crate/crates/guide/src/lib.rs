//! The book's chapters, included as doc comments so that every code
//! snippet in `book/src` runs under `cargo test --doc`. A failing chapter
//! test points at the module named after it.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/instances.md")]
pub mod instances {}

#[doc = include_str!("../../../book/src/state-transitions.md")]
pub mod state_transitions {}

#[doc = include_str!("../../../book/src/planning-model.md")]
pub mod planning_model {}

#[doc = include_str!("../../../book/src/solving.md")]
pub mod solving {}

#[doc = include_str!("../../../book/src/effectiveness.md")]
pub mod effectiveness {}

#[doc = include_str!("../../../book/src/scenario-sweeps.md")]
pub mod scenario_sweeps {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
