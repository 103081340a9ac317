//! Command-line harness for mixture autoregressive models: configuration,
//! file formats, run manifests and the simulate / fit / select / forecast /
//! replicate commands.

pub mod commands;
pub mod config;
pub mod data;
pub mod manifest;
pub mod recipes;
pub mod replicate;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use manifest::RunManifest;
