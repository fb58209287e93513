//! Pavement maintenance-and-rehabilitation planning: domain model, data
//! preparation, deterioration environments, life-cycle reward accounting,
//! small dense networks and the reinforcement-learning agents that train on
//! them.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line live
//! in the `pavemr` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod agents;
pub mod dataprep;
pub mod domain;
pub mod envmodel;
pub mod error;
pub mod math;
pub mod neural;
pub mod rewardlca;
pub mod runner;

pub use error::{Error, Result};
