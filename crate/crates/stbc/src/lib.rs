//! Experiment harness around `stbc-core`: a thread-pool executor, Monte
//! Carlo codeword-error-rate sweeps, decoder audits, spectrum and search
//! jobs, result files and the `stbc` command line.
//!
//! Every job is reproducible: randomness is addressed by `(seed, stream,
//! trial)` and parallel work is reduced in index order, so output files
//! depend on the configuration and seed but not on the thread count.

pub mod config;
mod error;
pub mod exec;
pub mod harness;
pub mod jobs;
pub mod records;
pub mod tables;

pub use error::{Error, Result};

/// Version string written into every result file.
pub const TOOL_VERSION: &str = concat!("stbc ", env!("CARGO_PKG_VERSION"));

/// SHA-256 over the sources of both crates, fixed at build time.
pub const SOURCE_HASH: &str = env!("STBC_SOURCE_HASH");
