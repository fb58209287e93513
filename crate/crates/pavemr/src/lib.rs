//! File formats, run directories and the `pavemr` command line on top of
//! `pavemr-core`.

pub mod catalog;
pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod io;
pub mod model;
pub mod report;
pub mod vocab;

pub use error::{Error, Result};
