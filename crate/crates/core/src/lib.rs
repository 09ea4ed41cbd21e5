//! Capacity design for islanded community microgrids: DER screening, spectral
//! generator/battery power split, Monte Carlo adequacy and cost-optimal sizing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod optimizer;
pub mod profiles;
pub mod reliability;
pub mod report;
mod rng;
pub mod selection;
pub mod sizing;
pub mod spectral;

pub use error::{Error, Result};
pub use rng::{derive_seed, MAX_UNITS};
