//! File formats, parallel drivers and the command line for `tsvnet-core`.
//!
//! * [`touchstone`]: `.sNp` export and import.
//! * [`config`]: the JSON run configuration and its schema.
//! * [`parallel`], [`search`], [`checkpoint`]: worker pools, the
//!   checkpointed layout search and result files.
//! * [`dataset`], [`surrogate`]: the JSON-lines dataset and the evaluator
//!   that reads predictions in the same schema.
//! * [`commands`], [`cli`]: the `tsvnet` subcommands.

pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod io;
pub mod parallel;
pub mod rlcg_dump;
pub mod search;
pub mod surrogate;
pub mod touchstone;

pub use error::{CliError, CliResult};
