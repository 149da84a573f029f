//! Tail decay rates and Erlang orders of stopped and regenerative Markov-modulated processes.
//!
//! The decay rate of a tail is the root of the spectral abscissa of a
//! Metzler matrix pencil, and its polynomial shape is the length of the
//! longest chain of classes of the pencil at that root. This crate computes
//! both and checks them against exact simulation.

// Index loops read closer to the matrix algebra; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classes;
pub mod commands;
pub mod error;
pub mod fixtures;
pub mod fuzz;
pub mod generators;
pub mod io;
pub mod models;
pub mod pencil;
pub mod simulator;
pub mod spectral;
pub mod transforms;

pub use error::{Error, Result};
