//! Incremental idea-cluster engine: turns a stream of discussion utterances
//! into a process graph of idea clusters tagged with mental images, and
//! tracks team problem-solving metrics over it.

pub mod canonical;
pub mod cli;
pub mod context;
pub mod error;
pub mod graph;
pub mod icn;
pub mod ingest;
pub mod metrics;
pub mod service;
pub mod session;

pub use error::{Error, Result};
