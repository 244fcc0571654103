//! File formats, the experiment harness and the `bnactive` command-line tool built
//! on [`bnactive_core`].

pub mod committee;
pub mod dataset;
pub mod experiment;
pub mod network;
pub mod query;
pub mod report;

mod error;

pub use bnactive_core as core;
pub use error::{Error, Result};
