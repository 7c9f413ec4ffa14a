//! Parabolic weights, fractional maximal operators and fractional integrals
//! with time lag, evaluated on uniform space-time grids.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod constructions;
pub mod error;
pub mod experiment;
pub mod family;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod operators;
pub mod weights;

pub use error::{Error, Result};
