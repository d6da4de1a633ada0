//! Command-line workflow around the `idbr` crate: configuration files,
//! CSV ingestion, and JSON result documents for `fit`, `predict`, and
//! `simulate`.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod ingest;

pub use commands::{run_fit, run_predict, run_simulate};
pub use config::RunConfig;
