//! File formats, batch drivers and reports around `elastoquant-core`.

pub mod config;
pub mod error;
pub mod groundtruth;
pub mod imageio;
pub mod manifest;
pub mod plot;
pub mod report;
pub mod runner;
pub mod scene;

pub use error::{CliError, Result};
