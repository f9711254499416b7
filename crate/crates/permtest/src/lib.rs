//! Batch tooling around `permtest-core`: price CSV ingestion and cleaning,
//! firm- and year-separated experiment streams, report files and the
//! `permtest` command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod emit;
mod error;
pub mod panel;
pub mod prices;
pub mod selftest;
pub mod streams;

pub use error::{Error, Result};
