#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod cli;
pub mod datamodel;
pub mod demand;
pub mod error;
pub mod optimizer;
pub mod rooftop_pv;
pub mod synthetic;

pub use error::{Error, Result};
