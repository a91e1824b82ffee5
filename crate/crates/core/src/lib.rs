#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;

pub mod error;
pub mod factorial;
pub mod approx;
pub mod apps;
pub mod contour;
mod dd;
pub mod fock;
pub mod synth;

pub use error::{Error, Result};
