// `!(a < b)` comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod kahler;
pub mod quadrature;
pub mod quantum;
pub mod sampling;
pub mod simplex;
pub mod symplectic;
