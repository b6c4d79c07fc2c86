//! Batch front end for the `fracg` solver: run configurations, seeded
//! corpora, estimate evaluation and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod pipeline;
pub mod schema;

pub use config::RunConfig;
pub use corpus::generate_corpus;
pub use error::CliError;
pub use pipeline::{run, Mode, Summary};
