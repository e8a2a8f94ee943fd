//! Surrogate-guided exploration of approximate arithmetic accelerators.
//!
//! The crate is organised bottom-up:
//!
//! - [`circuit`]: and-inverter graphs, bit-parallel simulation and dataflow composition.
//! - [`approxlib`]: a parameterised library of approximate adders and multipliers with
//!   exhaustive or sampled error characterisation.
//! - [`backend`]: an exact cost oracle (k-LUT mapping, switching-activity power, depth) and a
//!   cheap structural feature extractor.
//! - [`bench`]: accelerator templates, bundled datasets and quality-of-result evaluation.
//! - [`surrogate`]: regression models, feature pipelines and training-set generation.
//! - [`search`]: Pareto archive, ES(mu+lambda), NSGA-II, hill climbing, hierarchical search,
//!   hypervolume and final oracle re-evaluation.

pub mod approxlib;
pub mod backend;
pub mod bench;
pub mod circuit;
mod error;
pub mod search;
pub mod surrogate;

pub use error::{Error, Result};
