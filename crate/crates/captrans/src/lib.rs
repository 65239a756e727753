//! Strategic capacity planning under rising carbon taxes.
//!
//! This crate builds and solves mixed-integer linear programs for a firm
//! that can expand capacity by buying machines of competing technologies,
//! adjust work shifts, maintain and eventually salvage its fleet — all while
//! an increasing carbon tax prices its production and inventory emissions.
//! On top of the optimal plans it computes transition-effectiveness
//! measures (per-technology production shares, weighted transition periods)
//! and runs seeded scenario sweeps over demand magnitude and technology
//! emission/investment ratios.
//!
//! Start with [`instance::appendix_example`] for a ready-made problem, build
//! a model with [`model::build`], and solve it with [`solver::solve_milp`].
//! The `captrans` binary wraps the same pipeline behind subcommands; see the
//! book under `book/` for a guided tour.

pub mod cli;
pub mod effectiveness;
pub mod error;
pub mod instance;
pub mod model;
pub mod reporting;
pub mod scenario;
pub mod solver;
pub mod statespace;

pub use error::{Error, Result};
