//! Command-line companion to `iconforge-core`: file formats, image IO,
//! dataset generation, and the `iconforge` binary's subcommands.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod formats;
pub mod imgio;
pub mod ingest;
pub mod model;
pub mod overlay;
pub mod report;
