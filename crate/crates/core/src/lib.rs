#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod integrator;
pub mod lattice;
pub mod pml;
pub mod rng;

pub use error::{Error, Result};
