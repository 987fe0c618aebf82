//! Fractional dispersion of Helmholtz fields.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod fieldquad;
pub mod measure;
pub mod periodic;
pub mod quad;
pub mod scatdata;
pub mod schrlimit;
pub mod specfun;

pub use error::{Error, Result};
