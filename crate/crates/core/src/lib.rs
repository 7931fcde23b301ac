//! Exact exponent ledger, weight-feasibility search, decay-lemma lab and a
//! 1D coupled fluid-structure simulator.

pub mod band;
pub mod cli;
pub mod enclosure;
pub mod error;
pub mod exponents;
pub mod feasibility;
pub mod lemma;
pub mod minplus;
pub mod rational;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
pub use rational::Rational;
