//! File formats, translation and replacement providers, the experiment grid
//! runner and the `textaug` command line, on top of [`textaug_core`].

pub mod cli;
pub mod config;
pub mod contextual;
pub mod dataset;
pub mod error;
pub mod predictions;
pub mod report;
pub mod resources;
pub mod runner;
pub mod translate;

pub use error::{Category, Error, Result};
