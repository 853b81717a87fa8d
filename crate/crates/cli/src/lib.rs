//! Command-line pipeline: generate → train → predict → diff → heatmap.

pub mod commands;
pub mod config;
pub mod grid;
pub mod heatmap;
pub mod manifest;
pub mod table;

pub use commands::{run, Cli};
