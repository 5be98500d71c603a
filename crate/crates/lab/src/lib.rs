//! Host-side companion to `kljn-core`: parallel experiment scheduling, CSV
//! and SVG output, run manifests and the `kljn` command-line front end.

pub mod cli;
pub mod config;
pub mod csvio;
mod error;
pub mod manifest;
pub mod runner;
pub mod svg;

pub use error::{LabError, Result};
