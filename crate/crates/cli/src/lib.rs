//! Library side of the `borscat` command: run specs, caching, artifact
//! writing and plotting.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cache;
pub mod commands;
pub mod error;
pub mod io;
pub mod plot;
pub mod spec;

pub use error::{CliError, CliResult};
