#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conformal;
pub mod error;
pub mod flow;
pub mod initial_data;
pub mod jang;
pub mod pipeline;
pub mod qlm;
pub mod radial;
pub mod surface;

pub use error::{Error, ErrorKind, Result};
