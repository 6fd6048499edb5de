// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod friction;
pub mod pointer;
pub mod psychophysics;
pub mod robot;
pub mod session;
pub mod trace;
pub mod wire;

pub use error::{Error, Result};
