//! File formats, reports and the `fockcalc` command line.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod opmatrix;
pub mod polyseries;
pub mod report;
