#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audits;
pub mod error;
pub mod evolution;
pub mod fractional;
pub mod highlow;
pub mod invariants;
pub mod nonlinearity;
pub mod spectral;

pub use error::{Error, Result};
